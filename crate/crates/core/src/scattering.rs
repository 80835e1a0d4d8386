//! Transition probabilities `|ψ_out* S ψ_in|²` for an S-matrix over labeled channels.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{BornError, Result};
use crate::linalg::{self, ComplexMatrix, ComplexVector};
use crate::operators::StateVector;
use crate::wire;

/// Frobenius bound on `S*S − I`.
pub const UNITARITY_TOL: f64 = 1e-10;
const NORM_TOL: f64 = 1e-10;
const PROJECTOR_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SMatrixWire", into = "SMatrixWire")]
pub struct SMatrix {
    matrix: ComplexMatrix,
    channel_labels: Vec<String>,
    unitarity_deviation: f64,
}

#[derive(Serialize, Deserialize)]
struct SMatrixWire {
    dim: usize,
    channel_labels: Vec<String>,
    #[serde(with = "wire::matrix")]
    matrix: ComplexMatrix,
}

impl TryFrom<SMatrixWire> for SMatrix {
    type Error = BornError;

    fn try_from(w: SMatrixWire) -> Result<Self> {
        linalg::ensure_dim(w.dim, w.matrix.nrows())?;
        SMatrix::new(w.matrix, w.channel_labels)
    }
}

impl From<SMatrix> for SMatrixWire {
    fn from(s: SMatrix) -> Self {
        SMatrixWire { dim: s.dim(), channel_labels: s.channel_labels, matrix: s.matrix }
    }
}

impl SMatrix {
    /// Unitary S-matrix with one label per channel.
    pub fn new(matrix: ComplexMatrix, channel_labels: Vec<String>) -> Result<Self> {
        let s = Self::new_unchecked(matrix, channel_labels)?;
        if !s.is_unitary() {
            return Err(BornError::NotUnitary { deviation: s.unitarity_deviation });
        }
        Ok(s)
    }

    /// Accepts a nonunitary matrix; the deviation is kept for diagnostics.
    pub fn new_unchecked(matrix: ComplexMatrix, channel_labels: Vec<String>) -> Result<Self> {
        let dim = linalg::ensure_square(&matrix)?;
        if channel_labels.len() != dim {
            return Err(BornError::LengthMismatch { expected: dim, found: channel_labels.len() });
        }
        let mut seen = HashSet::new();
        for label in &channel_labels {
            if !seen.insert(label.as_str()) {
                return Err(BornError::LabelCollision(label.clone()));
            }
        }
        let unitarity_deviation = unitarity_report(&matrix);
        Ok(SMatrix { matrix, channel_labels, unitarity_deviation })
    }

    /// Channels labeled `"0"`, `"1"`, ...
    pub fn unlabeled(matrix: ComplexMatrix) -> Result<Self> {
        let labels = (0..matrix.nrows()).map(|i| i.to_string()).collect();
        Self::new(matrix, labels)
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn channel_labels(&self) -> &[String] {
        &self.channel_labels
    }

    pub fn unitarity_deviation(&self) -> f64 {
        self.unitarity_deviation
    }

    pub fn is_unitary(&self) -> bool {
        self.unitarity_deviation <= UNITARITY_TOL
    }

    /// `S*`, the S-matrix of the reversed process.
    pub fn adjoint(&self) -> SMatrix {
        SMatrix {
            matrix: self.matrix.adjoint(),
            channel_labels: self.channel_labels.clone(),
            unitarity_deviation: unitarity_report(&self.matrix.adjoint()),
        }
    }

    fn require_unitary(&self) -> Result<()> {
        if self.is_unitary() {
            Ok(())
        } else {
            Err(BornError::NotUnitary { deviation: self.unitarity_deviation })
        }
    }
}

/// `‖S*S − I‖_F`
pub fn unitarity_report(s: &ComplexMatrix) -> f64 {
    linalg::frobenius(&(s.adjoint() * s - linalg::identity(s.ncols())))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Transition {
    pub probability: f64,
    /// Set when `S` is not unitary; the value is then not a probability.
    pub nonunitary: bool,
}

fn ensure_unit(psi: &StateVector) -> Result<()> {
    let norm = psi.norm();
    if (norm - 1.0).abs() > NORM_TOL {
        return Err(BornError::NotNormalized { norm });
    }
    Ok(())
}

/// `|ψ_out* S ψ_in|²`
pub fn transition_probability(s: &SMatrix, psi_in: &StateVector, psi_out: &StateVector) -> Result<Transition> {
    linalg::ensure_dim(s.dim(), psi_in.dim())?;
    linalg::ensure_dim(s.dim(), psi_out.dim())?;
    ensure_unit(psi_in)?;
    ensure_unit(psi_out)?;
    let amplitude = psi_out.amplitudes().dotc(&(s.matrix() * psi_in.amplitudes()));
    Ok(Transition { probability: amplitude.norm_sqr(), nonunitary: !s.is_unitary() })
}

/// Distribution of out-channels over a complete orthonormal out-basis.
pub fn transition_distribution(s: &SMatrix, psi_in: &StateVector, out_basis: &[ComplexVector]) -> Result<Vec<f64>> {
    s.require_unitary()?;
    linalg::ensure_dim(s.dim(), psi_in.dim())?;
    ensure_unit(psi_in)?;
    for phi in out_basis {
        linalg::ensure_dim(s.dim(), phi.len())?;
    }
    let deviation = linalg::gram_deviation(out_basis);
    if deviation > NORM_TOL {
        return Err(BornError::NotOrthonormal { deviation });
    }
    if out_basis.len() != s.dim() {
        return Err(BornError::InvalidArgument(format!(
            "out-basis has {} vectors, complete basis needs {}",
            out_basis.len(),
            s.dim()
        )));
    }
    let out = s.matrix() * psi_in.amplitudes();
    Ok(out_basis.iter().map(|phi| phi.dotc(&out).norm_sqr()).collect())
}

/// `‖Π S ψ_in‖²` for an orthogonal projector `Π` onto a (possibly degenerate) channel.
pub fn degenerate_channel_probability(s: &SMatrix, psi_in: &StateVector, projector: &ComplexMatrix) -> Result<f64> {
    s.require_unitary()?;
    linalg::ensure_square(projector)?;
    linalg::ensure_dim(s.dim(), projector.nrows())?;
    linalg::ensure_dim(s.dim(), psi_in.dim())?;
    ensure_unit(psi_in)?;
    let deviation = linalg::hermitian_deviation(projector)
        .max(linalg::max_abs_entry(&(projector * projector - projector)));
    if deviation > PROJECTOR_TOL {
        return Err(BornError::NotProjector { deviation });
    }
    Ok((projector * (s.matrix() * psi_in.amplitudes())).norm_squared())
}

/// `Σ_m |φ_m* S ψ_in|²` over an orthonormal family spanning a channel subspace.
pub fn channel_sum_probability(s: &SMatrix, psi_in: &StateVector, basis: &[ComplexVector]) -> Result<f64> {
    linalg::ensure_dim(s.dim(), psi_in.dim())?;
    ensure_unit(psi_in)?;
    let deviation = linalg::gram_deviation(basis);
    if deviation > NORM_TOL {
        return Err(BornError::NotOrthonormal { deviation });
    }
    let out = s.matrix() * psi_in.amplitudes();
    Ok(basis.iter().map(|phi| phi.dotc(&out).norm_sqr()).sum())
}
