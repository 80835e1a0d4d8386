use thiserror::Error;

/// Errors raised by constructors and operations across the toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum BornError {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not Hermitian (max |A - A*| = {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("matrix is not positive semidefinite (smallest eigenvalue {min_eigenvalue:.3e})")]
    NotPsd { min_eigenvalue: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("operation requires a state of nonzero intensity")]
    EmptyState,

    #[error("measure elements do not sum to the identity (max deviation {deviation:.3e})")]
    IncompleteSum { deviation: f64 },

    #[error("duplicate label {0:?}")]
    LabelCollision(String),

    #[error("measure element {index} is zero")]
    ZeroElement { index: usize },

    #[error("measure has no elements")]
    EmptyMeasure,

    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("rate for element {index} is negative ({value:.3e})")]
    NegativeRate { index: usize, value: f64 },

    #[error("event log has no events")]
    EmptyLog,

    #[error("matrix is not normal (||XX* - X*X||_F = {deviation:.3e})")]
    NotNormal { deviation: f64 },

    #[error("vector is not normalized (norm {norm})")]
    NotNormalized { norm: f64 },

    #[error("vectors are not orthonormal (max Gram deviation {deviation:.3e})")]
    NotOrthonormal { deviation: f64 },

    #[error("matrix is not unitary (||S*S - I||_F = {deviation:.3e})")]
    NotUnitary { deviation: f64 },

    #[error("operator is not an orthogonal projector (deviation {deviation:.3e})")]
    NotProjector { deviation: f64 },

    #[error("calibration states span rank {rank}, need {required}")]
    RankDeficient { rank: usize, required: usize },

    #[error("no convergence after {iterations} iterations (last change {last_change:.3e})")]
    NoConvergence { iterations: usize, last_change: f64 },

    #[error("target {index} = {target} lies outside the spectral range [{min}, {max}]")]
    Infeasible { index: usize, target: f64, min: f64, max: f64 },

    #[error("calibration data error: {0}")]
    DataError(String),

    #[error("eigendecomposition failed to converge")]
    EigenFailure,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, BornError>;

impl BornError {
    /// Stable variant name used in machine-readable reports.
    pub fn code(&self) -> &'static str {
        match self {
            BornError::NotSquare { .. } => "NotSquare",
            BornError::NotHermitian { .. } => "NotHermitian",
            BornError::NotPsd { .. } => "NotPSD",
            BornError::DimensionMismatch { .. } => "DimensionMismatch",
            BornError::EmptyState => "EmptyState",
            BornError::IncompleteSum { .. } => "IncompleteSum",
            BornError::LabelCollision(_) => "LabelCollision",
            BornError::ZeroElement { .. } => "ZeroElement",
            BornError::EmptyMeasure => "EmptyMeasure",
            BornError::LengthMismatch { .. } => "LengthMismatch",
            BornError::NegativeRate { .. } => "NegativeRate",
            BornError::EmptyLog => "EmptyLog",
            BornError::NotNormal { .. } => "NotNormal",
            BornError::NotNormalized { .. } => "NotNormalized",
            BornError::NotOrthonormal { .. } => "NotOrthonormal",
            BornError::NotUnitary { .. } => "NotUnitary",
            BornError::NotProjector { .. } => "NotProjector",
            BornError::RankDeficient { .. } => "RankDeficient",
            BornError::NoConvergence { .. } => "NoConvergence",
            BornError::Infeasible { .. } => "Infeasible",
            BornError::DataError(_) => "DataError",
            BornError::EigenFailure => "EigenFailure",
            BornError::InvalidArgument(_) => "InvalidArgument",
        }
    }
}
