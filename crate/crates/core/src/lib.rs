//! Finite-dimensional quantum measurement toolkit.
//!
//! Sources are density operators whose trace is the source intensity. Measurement devices
//! are quantum measures (discrete POVMs); a detector pairs a measure with a scale of values
//! and measures `X = Σ_k x_k P_k`. The crate computes response rates `p_k = tr ρ P_k`,
//! samples detection events from them, and checks the resulting statistics against
//! quantum values. Around that core sit spectral (projective) measures, Naimark dilation,
//! measurement tomography, maximum-entropy state estimation and S-matrix transition
//! probabilities.

pub mod dilation;
pub mod error;
pub mod linalg;
pub mod measures;
pub mod operators;
pub mod random;
pub mod sampling;
pub mod scattering;
pub mod spectral;
pub mod tomography;
pub mod wire;

pub use error::{BornError, Result};
pub use linalg::{ComplexMatrix, ComplexVector};
pub use measures::{Detector, QuantumMeasure, Scale};
pub use operators::{DensityOperator, StateVector};

/// Maximum entrywise `|A − A*|` accepted as Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Eigenvalue floor accepted as positive semidefinite.
pub const PSD_TOL: f64 = 1e-10;
/// Maximum entrywise deviation of `Σ_k P_k` from the identity.
pub const COMPLETENESS_TOL: f64 = 1e-10;
/// Rates down to `-RATE_CLIP_TOL` (times `max(1, tr ρ)`) are rounding and clip to zero.
pub const RATE_CLIP_TOL: f64 = 1e-12;
