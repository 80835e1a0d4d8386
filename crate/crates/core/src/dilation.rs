//! Naimark dilation: realize a quantum measure as a projective measure on a larger space.
//!
//! The isometry `V` stacks one block per element. In the canonical form block `k` is the
//! Hermitian square root `√P_k` (so `D = K·d`); the rank-trimmed form keeps only the rows
//! `√μ_i u_i*` for the eigenpairs of `P_k` with `μ_i > 1e-10` (so `D = Σ_k rank P_k`).
//! In both cases `V*V = Σ_k P_k = I`, and `Π_k` is the coordinate projector onto block `k`,
//! so `tr(VρV* Π_k) = tr(ρ V*Π_kV) = tr ρ P_k`.

use serde::{Deserialize, Serialize};

use crate::error::{BornError, Result};
use crate::linalg::{self, c, ComplexMatrix};
use crate::measures::QuantumMeasure;
use crate::operators::DensityOperator;
use crate::wire;
use crate::PSD_TOL;

/// Eigenvalue threshold deciding the rank of an element in the trimmed form.
pub const RANK_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DilationKind {
    /// `D = K·d`, blocks `√P_k`.
    #[default]
    Block,
    /// `D = Σ_k rank P_k`.
    RankTrimmed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dilation {
    /// `D × d` isometry.
    #[serde(rename = "V", with = "wire::matrix")]
    pub isometry: ComplexMatrix,
    pub projective_measure: QuantumMeasure,
}

impl Dilation {
    pub fn source_dim(&self) -> usize {
        self.isometry.ncols()
    }

    pub fn dilated_dim(&self) -> usize {
        self.isometry.nrows()
    }

    pub fn element_count(&self) -> usize {
        self.projective_measure.len()
    }

    /// `‖V*V − I‖_F`
    pub fn isometry_deviation(&self) -> f64 {
        let d = self.source_dim();
        linalg::frobenius(&(self.isometry.adjoint() * &self.isometry - linalg::identity(d)))
    }

    /// `V* Π_k V`, which reproduces `P_k`.
    pub fn pulled_back_elements(&self) -> Vec<ComplexMatrix> {
        let va = self.isometry.adjoint();
        self.projective_measure.elements().iter().map(|pi| &va * pi * &self.isometry).collect()
    }

    /// Largest entrywise `|V*Π_kV − P_k|` against `measure`.
    pub fn reconstruction_deviation(&self, measure: &QuantumMeasure) -> f64 {
        self.pulled_back_elements()
            .iter()
            .zip(measure.elements())
            .map(|(a, b)| linalg::max_abs_entry(&(a - b)))
            .fold(0.0, f64::max)
    }

    /// Row range `[start, end)` of each block in `V`, read off the diagonal of `Π_k`.
    pub fn block_ranges(&self) -> Vec<(usize, usize)> {
        self.projective_measure
            .elements()
            .iter()
            .map(|pi| {
                let rows: Vec<usize> = (0..pi.nrows()).filter(|&i| pi[(i, i)].re > 0.5).collect();
                (rows[0], rows[rows.len() - 1] + 1)
            })
            .collect()
    }
}

pub fn naimark_dilate(measure: &QuantumMeasure) -> Result<Dilation> {
    naimark_dilate_with(measure, DilationKind::Block)
}

pub fn naimark_dilate_with(measure: &QuantumMeasure, kind: DilationKind) -> Result<Dilation> {
    let d = measure.dim();
    let row_blocks: Vec<ComplexMatrix> = measure
        .elements()
        .iter()
        .map(|p| match kind {
            DilationKind::Block => linalg::psd_sqrt(p, PSD_TOL),
            DilationKind::RankTrimmed => trimmed_root(p),
        })
        .collect::<Result<_>>()?;
    let total: usize = row_blocks.iter().map(|b| b.nrows()).sum();
    let mut isometry = ComplexMatrix::zeros(total, d);
    let mut blocks = Vec::with_capacity(row_blocks.len());
    let mut start = 0;
    for b in &row_blocks {
        isometry.view_mut((start, 0), (b.nrows(), d)).copy_from(b);
        blocks.push((start, start + b.nrows()));
        start += b.nrows();
    }
    let projectors = blocks
        .iter()
        .map(|&(s, e)| {
            let mut pi = ComplexMatrix::zeros(total, total);
            for i in s..e {
                pi[(i, i)] = c(1.0, 0.0);
            }
            pi
        })
        .collect();
    let projective_measure = QuantumMeasure::new(projectors, measure.labels().to_vec())?;
    Ok(Dilation { isometry, projective_measure })
}

/// Rows `√μ_i u_i*` for eigenpairs with `μ_i > RANK_TOL`.
fn trimmed_root(p: &ComplexMatrix) -> Result<ComplexMatrix> {
    let (values, vectors) = linalg::hermitian_eigen(p)?;
    if values[0] < -PSD_TOL {
        return Err(BornError::NotPsd { min_eigenvalue: values[0] });
    }
    let kept: Vec<usize> = (0..values.len()).filter(|&i| values[i] > RANK_TOL).collect();
    let rows: Vec<_> = kept
        .iter()
        .map(|&i| vectors.column(i).adjoint() * c(values[i].sqrt(), 0.0))
        .collect();
    Ok(ComplexMatrix::from_rows(&rows))
}

/// `tr(VρV* Π_k)` for each element.
pub fn dilated_rates(dilation: &Dilation, rho: &DensityOperator) -> Result<Vec<f64>> {
    linalg::ensure_dim(dilation.source_dim(), rho.dim())?;
    let lifted = &dilation.isometry * rho.matrix() * dilation.isometry.adjoint();
    Ok(dilation
        .projective_measure
        .elements()
        .iter()
        .map(|pi| linalg::trace_product(&lifted, pi).re.max(0.0))
        .collect())
}
