//! Quantum measurement tomography: recover a quantum measure from known calibration
//! states and the rates observed for them.
//!
//! Each element is first fitted by least squares in the real `d²`-dimensional space of
//! Hermitian matrices (`tr ρ_j P_k = coords(ρ_j)·coords(P_k)`); the fitted family is then
//! projected onto `{P_k ⪰ 0, Σ_k P_k = I}` with Dykstra's alternating projections.

pub mod maxent;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{BornError, Result};
use crate::linalg::{self, c, ComplexMatrix};
use crate::measures::{response_rates, QuantumMeasure};
use crate::operators::DensityOperator;

pub use maxent::{maxent_state, MaxEntProblem, MaxEntSolution};

/// Relative singular-value cutoff for the rank of the calibration design.
pub const RANK_TOL: f64 = 1e-10;
/// Default relative tolerance on `Σ_k p[j][k] = tr ρ_j`.
pub const ROW_SUM_TOL: f64 = 1e-9;

/// Calibration states with the rate matrix `rates[j][k]` (row per state, column per element).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CalibrationWire", into = "CalibrationWire")]
pub struct CalibrationSet {
    states: Vec<DensityOperator>,
    rates: Vec<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
struct CalibrationWire {
    states: Vec<DensityOperator>,
    rates: Vec<Vec<f64>>,
}

impl TryFrom<CalibrationWire> for CalibrationSet {
    type Error = BornError;

    fn try_from(w: CalibrationWire) -> Result<Self> {
        CalibrationSet::new(w.states, w.rates)
    }
}

impl From<CalibrationSet> for CalibrationWire {
    fn from(c: CalibrationSet) -> Self {
        CalibrationWire { states: c.states, rates: c.rates }
    }
}

impl CalibrationSet {
    pub fn new(states: Vec<DensityOperator>, rates: Vec<Vec<f64>>) -> Result<Self> {
        Self::with_tolerance(states, rates, ROW_SUM_TOL)
    }

    /// Validates shapes, nonnegativity and that each row sums to the state's intensity
    /// within `row_sum_tol · max(1, tr ρ_j)`.
    pub fn with_tolerance(states: Vec<DensityOperator>, rates: Vec<Vec<f64>>, row_sum_tol: f64) -> Result<Self> {
        let first = states.first().ok_or_else(|| BornError::InvalidArgument("no calibration states".into()))?;
        let dim = first.dim();
        for rho in &states {
            linalg::ensure_dim(dim, rho.dim())?;
        }
        if rates.len() != states.len() {
            return Err(BornError::LengthMismatch { expected: states.len(), found: rates.len() });
        }
        let k = rates[0].len();
        if k == 0 {
            return Err(BornError::DataError("rate rows are empty".into()));
        }
        for (j, (row, rho)) in rates.iter().zip(&states).enumerate() {
            if row.len() != k {
                return Err(BornError::LengthMismatch { expected: k, found: row.len() });
            }
            if let Some(v) = row.iter().find(|v| v.is_nan() || **v < 0.0) {
                return Err(BornError::DataError(format!("row {j} has negative rate {v}")));
            }
            let sum: f64 = row.iter().sum();
            if (sum - rho.intensity()).abs() > row_sum_tol * rho.intensity().max(1.0) {
                return Err(BornError::DataError(format!(
                    "row {j} sums to {sum}, state intensity is {}",
                    rho.intensity()
                )));
            }
        }
        Ok(CalibrationSet { states, rates })
    }

    /// Exact rates of `measure` on `states`.
    pub fn from_measure(states: Vec<DensityOperator>, measure: &QuantumMeasure) -> Result<Self> {
        let rates = states.iter().map(|rho| response_rates(measure, rho)).collect::<Result<_>>()?;
        Self::new(states, rates)
    }

    pub fn dim(&self) -> usize {
        self.states[0].dim()
    }

    pub fn element_count(&self) -> usize {
        self.rates[0].len()
    }

    pub fn states(&self) -> &[DensityOperator] {
        &self.states
    }

    pub fn rates(&self) -> &[Vec<f64>] {
        &self.rates
    }
}

/// The seven qubit states `I/2` and `(I ± σ_i)/2`, `i ∈ {x, y, z}`.
pub fn pauli_calibration_states() -> Vec<DensityOperator> {
    let half = c(0.5, 0.0);
    let mut states = vec![DensityOperator::maximally_mixed(2)];
    for sigma in [linalg::sigma_x(), linalg::sigma_y(), linalg::sigma_z()] {
        for sign in [1.0, -1.0] {
            let m = (linalg::identity(2) + &sigma * c(sign, 0.0)) * half;
            states.push(DensityOperator::new(m).expect("Pauli eigenstate"));
        }
    }
    states
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompletenessReport {
    pub rank: usize,
    /// `d²`
    pub required: usize,
    pub complete: bool,
}

fn design_matrix(states: &[DensityOperator]) -> DMatrix<f64> {
    let d = states[0].dim();
    let mut a = DMatrix::zeros(states.len(), d * d);
    for (j, rho) in states.iter().enumerate() {
        a.row_mut(j).copy_from(&linalg::hermitian_coords(rho.matrix()).transpose());
    }
    a
}

fn numerical_rank(singular_values: &DVector<f64>) -> usize {
    let max = singular_values.iter().cloned().fold(0.0, f64::max);
    if max == 0.0 {
        return 0;
    }
    singular_values.iter().filter(|&&s| s > RANK_TOL * max).count()
}

/// Rank of the calibration states as vectors in the real space of Hermitian matrices.
pub fn informational_completeness(states: &[DensityOperator]) -> Result<CompletenessReport> {
    let first = states.first().ok_or_else(|| BornError::InvalidArgument("no calibration states".into()))?;
    let d = first.dim();
    for rho in states {
        linalg::ensure_dim(d, rho.dim())?;
    }
    let svd = design_matrix(states).svd(false, false);
    let rank = numerical_rank(&svd.singular_values);
    Ok(CompletenessReport { rank, required: d * d, complete: rank == d * d })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProjectionOptions {
    pub max_iterations: usize,
    /// Stop once successive iterates move less than this (Frobenius over all elements).
    pub exit_tol: f64,
}

impl Default for ProjectionOptions {
    fn default() -> Self {
        ProjectionOptions { max_iterations: 500, exit_tol: 1e-10 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Reconstruction {
    pub measure: QuantumMeasure,
    /// Unconstrained least-squares elements before projection.
    #[serde(with = "crate::wire::matrix_list")]
    pub least_squares: Vec<ComplexMatrix>,
    /// `√Σ_jk (tr ρ_j P̂_k − p[j][k])²` for the returned measure.
    pub residual: f64,
    /// Frobenius distance between the least-squares fit and the returned measure.
    pub projection_distance: f64,
    pub iterations: usize,
}

/// Least-squares fit per element followed by Dykstra projection onto valid measures.
pub fn reconstruct_measure(cal: &CalibrationSet) -> Result<Reconstruction> {
    reconstruct_measure_with(cal, ProjectionOptions::default())
}

pub fn reconstruct_measure_with(cal: &CalibrationSet, options: ProjectionOptions) -> Result<Reconstruction> {
    let d = cal.dim();
    let a = design_matrix(cal.states());
    let svd = a.clone().svd(true, true);
    let rank = numerical_rank(&svd.singular_values);
    if rank < d * d {
        return Err(BornError::RankDeficient { rank, required: d * d });
    }
    let least_squares: Vec<ComplexMatrix> = (0..cal.element_count())
        .map(|k| {
            let b = DVector::from_iterator(cal.rates().len(), cal.rates().iter().map(|row| row[k]));
            let x = svd
                .solve(&b, RANK_TOL * svd.singular_values.max())
                .map_err(|e| BornError::InvalidArgument(e.into()))?;
            Ok(linalg::from_hermitian_coords(&x, d))
        })
        .collect::<Result<_>>()?;

    let (elements, iterations) = dykstra(&least_squares, options)?;
    let projection_distance = least_squares
        .iter()
        .zip(&elements)
        .map(|(a, b)| linalg::frobenius(&(a - b)).powi(2))
        .sum::<f64>()
        .sqrt();
    let residual = cal
        .states()
        .iter()
        .zip(cal.rates())
        .flat_map(|(rho, row)| {
            elements
                .iter()
                .zip(row)
                .map(move |(p, r)| (linalg::trace_product(rho.matrix(), p).re - r).powi(2))
        })
        .sum::<f64>()
        .sqrt();
    let measure = QuantumMeasure::unlabeled(elements)?;
    Ok(Reconstruction { measure, least_squares, residual, projection_distance, iterations })
}

fn project_affine(elements: &[ComplexMatrix]) -> Vec<ComplexMatrix> {
    let d = elements[0].nrows();
    let k = elements.len() as f64;
    let excess: ComplexMatrix = elements.iter().sum::<ComplexMatrix>() - linalg::identity(d);
    let shift = excess * c(1.0 / k, 0.0);
    elements.iter().map(|p| p - &shift).collect()
}

fn project_psd(elements: &[ComplexMatrix]) -> Result<Vec<ComplexMatrix>> {
    elements.iter().map(linalg::psd_projection).collect()
}

fn distance(a: &[ComplexMatrix], b: &[ComplexMatrix]) -> f64 {
    a.iter().zip(b).map(|(x, y)| linalg::frobenius(&(x - y)).powi(2)).sum::<f64>().sqrt()
}

/// Dykstra's alternating projections between the product PSD cone and the affine set
/// `Σ_k P_k = I`, started from the least-squares fit. Returns the final affine iterate;
/// its eigenvalues are within the last cone distance (`< exit_tol`) of nonnegative.
fn dykstra(start: &[ComplexMatrix], options: ProjectionOptions) -> Result<(Vec<ComplexMatrix>, usize)> {
    let zeros = || vec![ComplexMatrix::zeros(start[0].nrows(), start[0].ncols()); start.len()];
    let add = |a: &[ComplexMatrix], b: &[ComplexMatrix]| -> Vec<ComplexMatrix> { a.iter().zip(b).map(|(x, y)| x + y).collect() };
    let sub = |a: &[ComplexMatrix], b: &[ComplexMatrix]| -> Vec<ComplexMatrix> { a.iter().zip(b).map(|(x, y)| x - y).collect() };

    let mut x = project_affine(start);
    let mut p = zeros();
    let mut q = zeros();
    let mut last_change = f64::INFINITY;
    for iteration in 1..=options.max_iterations {
        let xp = add(&x, &p);
        let y = project_psd(&xp)?;
        p = sub(&xp, &y);
        let yq = add(&y, &q);
        let x_next = project_affine(&yq);
        q = sub(&yq, &x_next);
        last_change = distance(&x_next, &x);
        x = x_next;
        if last_change < options.exit_tol && distance(&x, &y) < options.exit_tol {
            return Ok((x.iter().map(linalg::hermitian_part).collect(), iteration));
        }
    }
    Err(BornError::NoConvergence { iterations: options.max_iterations, last_change })
}
