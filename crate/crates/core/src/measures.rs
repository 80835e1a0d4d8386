//! Quantum measures (discrete POVMs), scales and detectors.
//!
//! A measurement device with detection elements `k` responds to a source `ρ` with mean
//! rates `p_k = tr ρ P_k`, where the `P_k` are Hermitian, positive semidefinite and sum
//! to the identity. Pairing the measure with a [`Scale`] of values `x_k` gives a
//! [`Detector`] measuring `X = Σ_k x_k P_k`.

use std::collections::HashSet;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{BornError, Result};
use crate::linalg::{self, c, ComplexMatrix, ComplexVector};
use crate::operators::{quantum_expectation, DensityOperator};
use crate::wire;
use crate::{COMPLETENESS_TOL, HERMITIAN_TOL, PSD_TOL, RATE_CLIP_TOL};

/// Finite family of Hermitian PSD operators summing to the identity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MeasureWire", into = "MeasureWire")]
pub struct QuantumMeasure {
    elements: Vec<ComplexMatrix>,
    labels: Vec<String>,
}

#[derive(Serialize, Deserialize)]
struct MeasureWire {
    dim: usize,
    labels: Vec<String>,
    #[serde(with = "wire::matrix_list")]
    elements: Vec<ComplexMatrix>,
}

impl TryFrom<MeasureWire> for QuantumMeasure {
    type Error = BornError;

    fn try_from(w: MeasureWire) -> Result<Self> {
        let m = QuantumMeasure::new(w.elements, w.labels)?;
        linalg::ensure_dim(w.dim, m.dim())?;
        Ok(m)
    }
}

impl From<QuantumMeasure> for MeasureWire {
    fn from(m: QuantumMeasure) -> Self {
        MeasureWire { dim: m.dim(), labels: m.labels, elements: m.elements }
    }
}

impl QuantumMeasure {
    /// Validates the elements: nonempty, square of equal dimension, Hermitian, PSD,
    /// nonzero, complete; labels unique and one per element.
    pub fn new(elements: Vec<ComplexMatrix>, labels: Vec<String>) -> Result<Self> {
        let first = elements.first().ok_or(BornError::EmptyMeasure)?;
        let dim = linalg::ensure_square(first)?;
        if labels.len() != elements.len() {
            return Err(BornError::LengthMismatch { expected: elements.len(), found: labels.len() });
        }
        let mut seen = HashSet::new();
        for label in &labels {
            if !seen.insert(label.as_str()) {
                return Err(BornError::LabelCollision(label.clone()));
            }
        }
        let mut sum = ComplexMatrix::zeros(dim, dim);
        for (index, p) in elements.iter().enumerate() {
            linalg::ensure_square(p)?;
            linalg::ensure_dim(dim, p.nrows())?;
            let deviation = linalg::hermitian_deviation(p);
            if deviation > HERMITIAN_TOL {
                return Err(BornError::NotHermitian { deviation });
            }
            let (eigenvalues, _) = linalg::hermitian_eigen(p)?;
            let min = eigenvalues[0];
            if min < -PSD_TOL {
                return Err(BornError::NotPsd { min_eigenvalue: min });
            }
            if eigenvalues[dim - 1] <= PSD_TOL {
                return Err(BornError::ZeroElement { index });
            }
            sum += p;
        }
        let deviation = linalg::max_abs_entry(&(sum - linalg::identity(dim)));
        if deviation > COMPLETENESS_TOL {
            return Err(BornError::IncompleteSum { deviation });
        }
        Ok(QuantumMeasure { elements, labels })
    }

    /// Same as [`QuantumMeasure::new`] with labels `"0"`, `"1"`, ...
    pub fn unlabeled(elements: Vec<ComplexMatrix>) -> Result<Self> {
        let labels = (0..elements.len()).map(|k| k.to_string()).collect();
        Self::new(elements, labels)
    }

    /// Projective measure onto the computational basis of `C^dim`.
    pub fn computational_basis(dim: usize) -> Self {
        let elements = (0..dim)
            .map(|k| {
                let mut p = ComplexMatrix::zeros(dim, dim);
                p[(k, k)] = c(1.0, 0.0);
                p
            })
            .collect();
        Self::unlabeled(elements).expect("basis projectors form a measure")
    }

    /// Rank-one projectors `φ_k φ_k*` onto an orthonormal basis.
    pub fn from_orthonormal_basis(basis: &[ComplexVector]) -> Result<Self> {
        let deviation = linalg::gram_deviation(basis);
        if deviation > COMPLETENESS_TOL {
            return Err(BornError::NotOrthonormal { deviation });
        }
        Self::unlabeled(basis.iter().map(linalg::outer).collect())
    }

    /// Qubit trine: `(2/3)|φ_k⟩⟨φ_k|` with `φ_k = cos(θ_k/2)|0⟩ + sin(θ_k/2)|1⟩`,
    /// `θ_k = 2πk/3`.
    pub fn trine() -> Self {
        let elements = trine_angles()
            .iter()
            .map(|&theta| {
                let phi = linalg::real_vector(&[(theta / 2.0).cos(), (theta / 2.0).sin()]);
                linalg::outer(&phi) * c(2.0 / 3.0, 0.0)
            })
            .collect();
        Self::unlabeled(elements).expect("trine is a measure")
    }

    pub fn dim(&self) -> usize {
        self.elements[0].nrows()
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[ComplexMatrix] {
        &self.elements
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn into_elements(self) -> Vec<ComplexMatrix> {
        self.elements
    }
}

/// Bloch-sphere angles of the trine directions.
pub fn trine_angles() -> [f64; 3] {
    let tau = std::f64::consts::TAU;
    [0.0, tau / 3.0, 2.0 * tau / 3.0]
}

/// Unit Bloch vectors `(sin θ_k, 0, cos θ_k)` of the trine states, usable as a
/// 3-vector scale.
pub fn trine_bloch_scale() -> Scale {
    let values = trine_angles()
        .iter()
        .map(|&t| vec![c(t.sin(), 0.0), c(0.0, 0.0), c(t.cos(), 0.0)])
        .collect();
    Scale::new(values, "bloch").expect("uniform scale")
}

/// Values `x_k` written on the detection elements; each value is a complex vector of
/// common length `m ≥ 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ScaleWire", into = "ScaleWire")]
pub struct Scale {
    values: Vec<Vec<Complex64>>,
    units: String,
}

#[derive(Serialize, Deserialize)]
struct ScaleWire {
    values: Vec<Vec<wire::WireComplex>>,
    #[serde(default)]
    units: String,
}

impl TryFrom<ScaleWire> for Scale {
    type Error = BornError;

    fn try_from(w: ScaleWire) -> Result<Self> {
        let values = w
            .values
            .into_iter()
            .map(|v| v.into_iter().map(wire::complex_from_wire).collect())
            .collect();
        Scale::new(values, w.units)
    }
}

impl From<Scale> for ScaleWire {
    fn from(s: Scale) -> Self {
        ScaleWire {
            values: s
                .values
                .iter()
                .map(|v| v.iter().map(|z| wire::complex_to_wire(*z)).collect())
                .collect(),
            units: s.units,
        }
    }
}

impl Scale {
    pub fn new(values: Vec<Vec<Complex64>>, units: impl Into<String>) -> Result<Self> {
        let width = values.first().map(Vec::len).ok_or_else(|| {
            BornError::InvalidArgument("scale needs at least one value".into())
        })?;
        if width == 0 {
            return Err(BornError::InvalidArgument("scale values must have length >= 1".into()));
        }
        if let Some(bad) = values.iter().find(|v| v.len() != width) {
            return Err(BornError::LengthMismatch { expected: width, found: bad.len() });
        }
        Ok(Scale { values, units: units.into() })
    }

    /// Scalar real scale.
    pub fn real(values: &[f64]) -> Self {
        Self::new(values.iter().map(|&x| vec![c(x, 0.0)]).collect(), "").expect("nonempty scale")
    }

    /// Scalar complex scale.
    pub fn complex(values: &[Complex64]) -> Self {
        Self::new(values.iter().map(|&x| vec![x]).collect(), "").expect("nonempty scale")
    }

    pub fn with_units(mut self, units: impl Into<String>) -> Self {
        self.units = units.into();
        self
    }

    /// Multiplies every value by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Scale {
            values: self.values.iter().map(|v| v.iter().map(|z| z * factor).collect()).collect(),
            units: self.units.clone(),
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Length `m` of each value vector.
    pub fn width(&self) -> usize {
        self.values[0].len()
    }

    pub fn values(&self) -> &[Vec<Complex64>] {
        &self.values
    }

    pub fn units(&self) -> &str {
        &self.units
    }
}

/// A quantum measure paired with a scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DetectorWire", into = "DetectorWire")]
pub struct Detector {
    id: String,
    measure: QuantumMeasure,
    scale: Scale,
}

#[derive(Serialize, Deserialize)]
struct DetectorWire {
    id: String,
    measure: QuantumMeasure,
    scale: Scale,
}

impl TryFrom<DetectorWire> for Detector {
    type Error = BornError;

    fn try_from(w: DetectorWire) -> Result<Self> {
        Ok(Detector::new(w.measure, w.scale)?.with_id(w.id))
    }
}

impl From<Detector> for DetectorWire {
    fn from(d: Detector) -> Self {
        DetectorWire { id: d.id, measure: d.measure, scale: d.scale }
    }
}

impl Detector {
    pub fn new(measure: QuantumMeasure, scale: Scale) -> Result<Self> {
        if measure.len() != scale.len() {
            return Err(BornError::LengthMismatch { expected: measure.len(), found: scale.len() });
        }
        Ok(Detector { id: "detector".into(), measure, scale })
    }

    pub fn with_id(mut self, id: impl Into<String>) -> Self {
        self.id = id.into();
        self
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn measure(&self) -> &QuantumMeasure {
        &self.measure
    }

    pub fn scale(&self) -> &Scale {
        &self.scale
    }

    /// Component `j` of `X = Σ_k x_k P_k`.
    pub fn measured_quantity(&self) -> Vec<ComplexMatrix> {
        measured_quantity(self)
    }
}

pub fn make_measure(elements: Vec<ComplexMatrix>, labels: Vec<String>) -> Result<QuantumMeasure> {
    QuantumMeasure::new(elements, labels)
}

/// Mean rates `p_k = tr ρ P_k`. Values in `[-tol, 0)` are clipped to zero with
/// `tol = 1e-12·max(1, tr ρ)`; anything more negative is an error.
pub fn response_rates(measure: &QuantumMeasure, rho: &DensityOperator) -> Result<Vec<f64>> {
    linalg::ensure_dim(measure.dim(), rho.dim())?;
    let floor = RATE_CLIP_TOL * rho.intensity().max(1.0);
    measure
        .elements()
        .iter()
        .enumerate()
        .map(|(index, p)| {
            let value = linalg::trace_product(rho.matrix(), p).re;
            if value < -floor {
                Err(BornError::NegativeRate { index, value })
            } else {
                Ok(value.max(0.0))
            }
        })
        .collect()
}

/// Response probabilities `p_k / tr ρ`.
pub fn response_probabilities(measure: &QuantumMeasure, rho: &DensityOperator) -> Result<Vec<f64>> {
    if rho.is_empty() {
        return Err(BornError::EmptyState);
    }
    let intensity = rho.intensity();
    Ok(response_rates(measure, rho)?.into_iter().map(|p| p / intensity).collect())
}

/// Largest entrywise deviation from `P_j P_k = δ_jk P_k` over all pairs.
pub fn projectivity_deviation(measure: &QuantumMeasure) -> f64 {
    let elements = measure.elements();
    let mut dev = 0.0f64;
    for (j, pj) in elements.iter().enumerate() {
        for (k, pk) in elements.iter().enumerate() {
            let product = pj * pk;
            let residual = if j == k { product - pk } else { product };
            dev = dev.max(linalg::max_abs_entry(&residual));
        }
    }
    dev
}

pub fn is_projective(measure: &QuantumMeasure, tol: f64) -> bool {
    projectivity_deviation(measure) <= tol
}

pub fn measured_quantity(detector: &Detector) -> Vec<ComplexMatrix> {
    let dim = detector.measure.dim();
    (0..detector.scale.width())
        .map(|j| {
            detector
                .measure
                .elements()
                .iter()
                .zip(detector.scale.values())
                .fold(ComplexMatrix::zeros(dim, dim), |acc, (p, x)| acc + p * x[j])
        })
        .collect()
}

/// `E f(x) = Σ_k q_k f(x_k)` with response probabilities `q_k = p_k / tr ρ`.
pub fn statistical_expectation<F>(detector: &Detector, rho: &DensityOperator, f: F) -> Result<Vec<Complex64>>
where
    F: Fn(&[Complex64]) -> Vec<Complex64>,
{
    let q = response_probabilities(&detector.measure, rho)?;
    let mut acc: Option<Vec<Complex64>> = None;
    for (qk, x) in q.iter().zip(detector.scale.values()) {
        let fx = f(x);
        match acc.as_mut() {
            None => acc = Some(fx.iter().map(|z| z * *qk).collect()),
            Some(sum) => {
                if sum.len() != fx.len() {
                    return Err(BornError::LengthMismatch { expected: sum.len(), found: fx.len() });
                }
                for (s, z) in sum.iter_mut().zip(&fx) {
                    *s += z * *qk;
                }
            }
        }
    }
    Ok(acc.unwrap_or_default())
}

/// Componentwise `⟨X_j⟩ / tr ρ` for the measured quantity.
pub fn quantity_expectation(detector: &Detector, rho: &DensityOperator) -> Result<Vec<Complex64>> {
    detector.measured_quantity().iter().map(|x| quantum_expectation(rho, x)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DrpReport {
    /// `max_k |p_k(αρ₁+βρ₂) − αp_k(ρ₁) − βp_k(ρ₂)|`
    pub linearity_deviation: f64,
    /// `|Σ_k p_k − tr(αρ₁+βρ₂)|`
    pub completeness_deviation: f64,
}

impl DrpReport {
    pub fn passes(&self, tol: f64) -> bool {
        self.linearity_deviation <= tol && self.completeness_deviation <= tol
    }
}

/// Checks linearity of the rates in `ρ` and that they sum to the intensity.
pub fn drp_linearity_report(
    measure: &QuantumMeasure,
    rho1: &DensityOperator,
    rho2: &DensityOperator,
    alpha: f64,
    beta: f64,
) -> Result<DrpReport> {
    linalg::ensure_dim(measure.dim(), rho1.dim())?;
    linalg::ensure_dim(measure.dim(), rho2.dim())?;
    let mixed = DensityOperator::combine(alpha, rho1, beta, rho2)?;
    let p1 = response_rates(measure, rho1)?;
    let p2 = response_rates(measure, rho2)?;
    let pm = response_rates(measure, &mixed)?;
    let linearity_deviation = pm
        .iter()
        .zip(p1.iter().zip(&p2))
        .map(|(m, (a, b))| (m - alpha * a - beta * b).abs())
        .fold(0.0, f64::max);
    let completeness_deviation = (pm.iter().sum::<f64>() - mixed.intensity()).abs();
    Ok(DrpReport { linearity_deviation, completeness_deviation })
}
