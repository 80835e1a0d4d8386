//! Maximum-entropy state estimation from expectation constraints.
//!
//! The maximizer of the von Neumann entropy subject to `tr ρX_j = v_j`, `tr ρ = 1` has the
//! Gibbs form `ρ(λ) = exp(−Σ_j λ_j X_j) / Z(λ)`. The multipliers minimize the smooth convex
//! dual `g(λ) = log Z(λ) + Σ_j λ_j v_j`, whose gradient is `v_j − tr ρ(λ)X_j` and whose
//! Hessian is the Kubo–Mori covariance of the `X_j`. We run damped Newton from `λ = 0`
//! with Armijo backtracking.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{BornError, Result};
use crate::linalg::{self, c, ComplexMatrix};
use crate::operators::DensityOperator;
use crate::wire;
use crate::HERMITIAN_TOL;

const ARMIJO_C: f64 = 1e-4;
const MAX_HALVINGS: usize = 40;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ProblemWire", into = "ProblemWire")]
pub struct MaxEntProblem {
    dim: usize,
    operators: Vec<ComplexMatrix>,
    targets: Vec<f64>,
    pub tolerance: f64,
    pub max_iterations: usize,
}

#[derive(Serialize, Deserialize)]
struct ProblemWire {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    dim: Option<usize>,
    #[serde(with = "wire::matrix_list")]
    operators: Vec<ComplexMatrix>,
    targets: Vec<f64>,
    #[serde(default = "default_tolerance")]
    tolerance: f64,
    #[serde(default = "default_max_iterations")]
    max_iterations: usize,
}

fn default_tolerance() -> f64 {
    1e-8
}

fn default_max_iterations() -> usize {
    100
}

impl TryFrom<ProblemWire> for MaxEntProblem {
    type Error = BornError;

    fn try_from(w: ProblemWire) -> Result<Self> {
        let dim = match (w.dim, w.operators.first()) {
            (Some(d), _) => d,
            (None, Some(x)) => x.nrows(),
            (None, None) => return Err(BornError::InvalidArgument("maxent problem without operators needs dim".into())),
        };
        let mut p = MaxEntProblem::new(dim, w.operators, w.targets)?;
        p.tolerance = w.tolerance;
        p.max_iterations = w.max_iterations;
        Ok(p)
    }
}

impl From<MaxEntProblem> for ProblemWire {
    fn from(p: MaxEntProblem) -> Self {
        ProblemWire {
            dim: Some(p.dim),
            operators: p.operators,
            targets: p.targets,
            tolerance: p.tolerance,
            max_iterations: p.max_iterations,
        }
    }
}

impl MaxEntProblem {
    pub fn new(dim: usize, operators: Vec<ComplexMatrix>, targets: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(BornError::InvalidArgument("dimension must be positive".into()));
        }
        if operators.len() != targets.len() {
            return Err(BornError::LengthMismatch { expected: operators.len(), found: targets.len() });
        }
        for x in &operators {
            linalg::ensure_square(x)?;
            linalg::ensure_dim(dim, x.nrows())?;
            let deviation = linalg::hermitian_deviation(x);
            if deviation > HERMITIAN_TOL {
                return Err(BornError::NotHermitian { deviation });
            }
        }
        Ok(MaxEntProblem {
            dim,
            operators: operators.iter().map(linalg::hermitian_part).collect(),
            targets,
            tolerance: default_tolerance(),
            max_iterations: default_max_iterations(),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn operators(&self) -> &[ComplexMatrix] {
        &self.operators
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaxEntSolution {
    pub state: DensityOperator,
    pub multipliers: Vec<f64>,
    pub iterations: usize,
    /// `max_j |tr ρX_j − v_j|`
    pub max_residual: f64,
    pub entropy: f64,
}

/// Gibbs state for given multipliers, with the pieces Newton needs.
struct Gibbs {
    /// `log Z`
    log_z: f64,
    /// Eigenvalues of `H = Σ λ_j X_j`.
    energies: Vec<f64>,
    /// Normalized Boltzmann weights.
    weights: Vec<f64>,
    /// `U* X_j U` in the eigenbasis of `H`.
    rotated: Vec<ComplexMatrix>,
    vectors: ComplexMatrix,
}

impl Gibbs {
    fn new(problem: &MaxEntProblem, lambda: &[f64]) -> Result<Self> {
        let d = problem.dim;
        let h = problem
            .operators
            .iter()
            .zip(lambda)
            .fold(ComplexMatrix::zeros(d, d), |acc, (x, l)| acc + x * c(*l, 0.0));
        let (energies, vectors) = linalg::hermitian_eigen(&h)?;
        let e_min = energies[0];
        let raw: Vec<f64> = energies.iter().map(|e| (-(e - e_min)).exp()).collect();
        let z: f64 = raw.iter().sum();
        let weights = raw.iter().map(|w| w / z).collect();
        let ua = vectors.adjoint();
        let rotated = problem.operators.iter().map(|x| &ua * x * &vectors).collect();
        Ok(Gibbs { log_z: z.ln() - e_min, energies, weights, rotated, vectors })
    }

    fn expectations(&self) -> Vec<f64> {
        self.rotated
            .iter()
            .map(|x| self.weights.iter().enumerate().map(|(a, w)| w * x[(a, a)].re).sum())
            .collect()
    }

    fn dual(&self, lambda: &[f64], targets: &[f64]) -> f64 {
        self.log_z + lambda.iter().zip(targets).map(|(l, v)| l * v).sum::<f64>()
    }

    /// Kubo–Mori covariance `∂²log Z/∂λ_i∂λ_j`.
    fn hessian(&self, means: &[f64]) -> DMatrix<f64> {
        let n = self.energies.len();
        let mut phi = DMatrix::zeros(n, n);
        for a in 0..n {
            for b in 0..n {
                let delta = (self.energies[a] - self.energies[b]).abs();
                let w = self.weights[a].max(self.weights[b]);
                phi[(a, b)] = if delta == 0.0 { w } else { w * (-(-delta).exp_m1()) / delta };
            }
        }
        let m = self.rotated.len();
        let mut hess = DMatrix::zeros(m, m);
        for i in 0..m {
            for j in i..m {
                let mut acc = 0.0;
                for a in 0..n {
                    for b in 0..n {
                        acc += (self.rotated[i][(a, b)] * self.rotated[j][(b, a)]).re * phi[(a, b)];
                    }
                }
                let v = acc - means[i] * means[j];
                hess[(i, j)] = v;
                hess[(j, i)] = v;
            }
        }
        hess
    }

    fn state(&self) -> Result<DensityOperator> {
        let w: Vec<f64> = self.weights.clone();
        let m = &self.vectors * linalg::diag_real(&w) * self.vectors.adjoint();
        DensityOperator::new(linalg::hermitian_part(&m))
    }
}

/// Solves `(H + μI)δ = −g`, raising `μ` until Cholesky succeeds.
fn newton_direction(hess: &DMatrix<f64>, grad: &DVector<f64>) -> DVector<f64> {
    let scale = hess.diagonal().iter().cloned().fold(0.0, f64::max).max(1.0);
    let mut mu = 1e-14 * scale;
    loop {
        let shifted = hess + DMatrix::identity(hess.nrows(), hess.ncols()) * mu;
        if let Some(chol) = shifted.cholesky() {
            return -chol.solve(grad);
        }
        mu *= 10.0;
    }
}

/// Maximum-entropy state of intensity one satisfying every constraint to `tolerance`.
pub fn maxent_state(problem: &MaxEntProblem) -> Result<MaxEntSolution> {
    for (index, (x, &target)) in problem.operators.iter().zip(&problem.targets).enumerate() {
        let (values, _) = linalg::hermitian_eigen(x)?;
        let (min, max) = (values[0], values[values.len() - 1]);
        let slack = problem.tolerance * (1.0 + max.abs().max(min.abs()));
        if target < min - slack || target > max + slack {
            return Err(BornError::Infeasible { index, target, min, max });
        }
    }

    let m = problem.operators.len();
    let targets = DVector::from_column_slice(&problem.targets);
    let mut lambda = vec![0.0; m];
    let mut gibbs = Gibbs::new(problem, &lambda)?;
    let mut last_change = f64::INFINITY;
    for iteration in 0..=problem.max_iterations {
        let means = DVector::from_vec(gibbs.expectations());
        let grad = &targets - &means;
        let max_residual = grad.amax();
        if max_residual <= problem.tolerance {
            let state = gibbs.state()?;
            let entropy = state.entropy()?;
            return Ok(MaxEntSolution { state, multipliers: lambda, iterations: iteration, max_residual, entropy });
        }
        if iteration == problem.max_iterations {
            break;
        }
        let hess = gibbs.hessian(means.as_slice());
        let step = newton_direction(&hess, &grad);
        let slope = grad.dot(&step);
        let current = gibbs.dual(&lambda, &problem.targets);
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..=MAX_HALVINGS {
            let trial: Vec<f64> = lambda.iter().zip(step.iter()).map(|(l, s)| l + t * s).collect();
            let candidate = Gibbs::new(problem, &trial)?;
            if candidate.dual(&trial, &problem.targets) <= current + ARMIJO_C * t * slope {
                accepted = Some((trial, candidate));
                break;
            }
            t *= 0.5;
        }
        let Some((trial, candidate)) = accepted else {
            return Err(BornError::NoConvergence { iterations: iteration + 1, last_change });
        };
        last_change = t * step.norm();
        lambda = trial;
        gibbs = candidate;
    }
    Err(BornError::NoConvergence { iterations: problem.max_iterations, last_change })
}
