//! Density operators, state vectors, quantum values and uncertainties.
//!
//! Density operators follow the intensity convention: `tr ρ` is the intensity of the
//! source and is not forced to one. `ρ = 0` is the empty state, the only state of zero
//! intensity. Quantities that need probabilities divide by the intensity explicitly
//! ([`quantum_expectation`], [`uncertainty`]).

use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{BornError, Result};
use crate::linalg::{self, c, ComplexMatrix, ComplexVector};
use crate::wire;
use crate::{HERMITIAN_TOL, PSD_TOL};

/// How strictly [`DensityOperator::with_options`] treats tiny negative eigenvalues.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Validation {
    /// Reject any eigenvalue below `-psd_tol`; keep the matrix untouched otherwise.
    #[default]
    Strict,
    /// Additionally clip eigenvalues in `[-psd_tol, 0)` to zero and rebuild the matrix.
    Sanitize,
}

/// Hermitian positive semidefinite operator with cached intensity `tr ρ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DensityWire", into = "DensityWire")]
pub struct DensityOperator {
    matrix: ComplexMatrix,
    intensity: f64,
}

#[derive(Serialize, Deserialize)]
struct DensityWire {
    dim: usize,
    intensity: f64,
    #[serde(with = "wire::matrix")]
    matrix: ComplexMatrix,
}

impl TryFrom<DensityWire> for DensityOperator {
    type Error = BornError;

    fn try_from(w: DensityWire) -> Result<Self> {
        linalg::ensure_dim(w.dim, w.matrix.nrows())?;
        let rho = DensityOperator::new(w.matrix)?;
        if (rho.intensity - w.intensity).abs() > 1e-12 * rho.intensity.max(1.0) {
            return Err(BornError::InvalidArgument(format!(
                "stored intensity {} disagrees with trace {}",
                w.intensity, rho.intensity
            )));
        }
        Ok(rho)
    }
}

impl From<DensityOperator> for DensityWire {
    fn from(rho: DensityOperator) -> Self {
        DensityWire { dim: rho.dim(), intensity: rho.intensity, matrix: rho.matrix }
    }
}

impl DensityOperator {
    /// Validates `matrix` as a density operator (square, Hermitian, PSD).
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        Self::with_options(matrix, Validation::Strict)
    }

    pub fn with_options(matrix: ComplexMatrix, validation: Validation) -> Result<Self> {
        linalg::ensure_square(&matrix)?;
        let deviation = linalg::hermitian_deviation(&matrix);
        if deviation > HERMITIAN_TOL {
            return Err(BornError::NotHermitian { deviation });
        }
        let min = linalg::min_eigenvalue(&matrix)?;
        if min < -PSD_TOL {
            return Err(BornError::NotPsd { min_eigenvalue: min });
        }
        let matrix = if validation == Validation::Sanitize && min < 0.0 {
            linalg::psd_projection(&matrix)?
        } else {
            matrix
        };
        let intensity = linalg::trace(&matrix).re;
        Ok(DensityOperator { matrix, intensity })
    }

    /// `ρ = ψψ*`; the intensity is `‖ψ‖²`.
    pub fn pure(psi: &StateVector) -> Self {
        let matrix = linalg::outer(psi.amplitudes());
        let intensity = psi.norm_sqr();
        DensityOperator { matrix, intensity }
    }

    /// The empty state `ρ = 0`.
    pub fn empty(dim: usize) -> Self {
        DensityOperator { matrix: ComplexMatrix::zeros(dim, dim), intensity: 0.0 }
    }

    /// `I/d`, intensity one.
    pub fn maximally_mixed(dim: usize) -> Self {
        DensityOperator {
            matrix: linalg::identity(dim) * c(1.0 / dim as f64, 0.0),
            intensity: 1.0,
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn intensity(&self) -> f64 {
        self.intensity
    }

    pub fn is_empty(&self) -> bool {
        self.intensity == 0.0
    }

    /// `ρ / tr ρ`.
    pub fn normalized(&self) -> Result<Self> {
        if self.is_empty() {
            return Err(BornError::EmptyState);
        }
        Ok(self.scaled(1.0 / self.intensity))
    }

    /// `αρ` for `α ≥ 0`.
    pub fn scaled(&self, alpha: f64) -> Self {
        assert!(alpha >= 0.0, "density operators scale by nonnegative factors only");
        DensityOperator { matrix: &self.matrix * c(alpha, 0.0), intensity: self.intensity * alpha }
    }

    /// `αρ₁ + βρ₂`, revalidated.
    pub fn combine(alpha: f64, rho1: &Self, beta: f64, rho2: &Self) -> Result<Self> {
        linalg::ensure_dim(rho1.dim(), rho2.dim())?;
        if alpha < 0.0 || beta < 0.0 {
            return Err(BornError::InvalidArgument(format!(
                "mixing weights must be nonnegative (alpha={alpha}, beta={beta})"
            )));
        }
        Self::new(&rho1.matrix * c(alpha, 0.0) + &rho2.matrix * c(beta, 0.0))
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        Ok(linalg::hermitian_eigen(&self.matrix)?.0)
    }

    /// Von Neumann entropy `-tr(ρ̂ log ρ̂)` of the normalized state.
    pub fn entropy(&self) -> Result<f64> {
        let normalized = self.normalized()?;
        Ok(normalized
            .eigenvalues()?
            .into_iter()
            .filter(|&x| x > 0.0)
            .map(|x| -x * x.ln())
            .sum())
    }
}

/// State vector; normalization is not required.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct StateVector {
    #[serde(with = "wire::vector")]
    amplitudes: ComplexVector,
}

impl StateVector {
    pub fn new(amplitudes: ComplexVector) -> Self {
        assert!(amplitudes.iter().all(|z| z.re.is_finite() && z.im.is_finite()), "amplitudes must be finite");
        StateVector { amplitudes }
    }

    pub fn from_slice(amplitudes: &[Complex64]) -> Self {
        Self::new(DVector::from_column_slice(amplitudes))
    }

    pub fn from_real(amplitudes: &[f64]) -> Self {
        Self::new(linalg::real_vector(amplitudes))
    }

    /// `k`-th computational basis vector of `C^dim`.
    pub fn basis(dim: usize, k: usize) -> Self {
        let mut v = ComplexVector::zeros(dim);
        v[k] = c(1.0, 0.0);
        Self::new(v)
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &ComplexVector {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.norm_squared()
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if n == 0.0 {
            return Err(BornError::EmptyState);
        }
        Ok(Self::new(&self.amplitudes / c(n, 0.0)))
    }
}

/// Builds a validated density operator.
pub fn make_density(matrix: ComplexMatrix) -> Result<DensityOperator> {
    DensityOperator::new(matrix)
}

pub fn pure_state(psi: &StateVector) -> DensityOperator {
    DensityOperator::pure(psi)
}

/// Unnormalized quantum value `⟨X⟩ = tr ρX`.
pub fn quantum_value(rho: &DensityOperator, x: &ComplexMatrix) -> Result<Complex64> {
    linalg::ensure_square(x)?;
    linalg::ensure_dim(rho.dim(), x.nrows())?;
    Ok(linalg::trace_product(rho.matrix(), x))
}

/// Intensity-normalized quantum value `tr ρX / tr ρ`.
pub fn quantum_expectation(rho: &DensityOperator, x: &ComplexMatrix) -> Result<Complex64> {
    if rho.is_empty() {
        return Err(BornError::EmptyState);
    }
    Ok(quantum_value(rho, x)? / rho.intensity())
}

/// `σ_X = √⟨(X − X̄)*(X − X̄)⟩` with intensity-normalized expectations. Works for
/// non-Hermitian `X`.
pub fn uncertainty(rho: &DensityOperator, x: &ComplexMatrix) -> Result<f64> {
    let mean = quantum_expectation(rho, x)?;
    let shifted = x - linalg::identity(x.nrows()) * mean;
    let variance = quantum_expectation(rho, &(shifted.adjoint() * &shifted))?.re;
    Ok(variance.max(0.0).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UncertaintyReport {
    pub sigma_a: f64,
    pub sigma_b: f64,
    /// `|⟨[A, B]⟩| / 2`
    pub commutator_bound: f64,
}

impl UncertaintyReport {
    pub fn product(&self) -> f64 {
        self.sigma_a * self.sigma_b
    }

    /// Whether `σ_A σ_B ≥ bound − slack`.
    pub fn holds(&self, slack: f64) -> bool {
        self.product() >= self.commutator_bound - slack
    }
}

/// Uncertainties of two Hermitian operators together with the commutator bound.
pub fn uncertainty_product_report(
    rho: &DensityOperator,
    a: &ComplexMatrix,
    b: &ComplexMatrix,
) -> Result<UncertaintyReport> {
    for m in [a, b] {
        linalg::ensure_square(m)?;
        let deviation = linalg::hermitian_deviation(m);
        if deviation > HERMITIAN_TOL {
            return Err(BornError::NotHermitian { deviation });
        }
    }
    if rho.is_empty() {
        return Err(BornError::EmptyState);
    }
    let commutator = a * b - b * a;
    Ok(UncertaintyReport {
        sigma_a: uncertainty(rho, a)?,
        sigma_b: uncertainty(rho, b)?,
        commutator_bound: quantum_expectation(rho, &commutator)?.norm() / 2.0,
    })
}
