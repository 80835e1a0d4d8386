use bornkit::BornError;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CliError {
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("{0}")]
    Parse(String),
    #[error("unsupported schema version {found:?}, expected {expected:?}")]
    UnsupportedVersion { found: String, expected: &'static str },
    #[error("unresolved {kind} reference {name:?}")]
    UnresolvedReference { kind: &'static str, name: String },
    #[error("{0}")]
    InvalidTask(String),
    #[error("no {0} tasks in config")]
    NoTasks(String),
    #[error(transparent)]
    Born(#[from] BornError),
}

impl CliError {
    pub fn code(&self) -> &'static str {
        match self {
            CliError::Io { .. } => "IoError",
            CliError::Parse(_) => "ParseError",
            CliError::UnsupportedVersion { .. } => "UnsupportedVersion",
            CliError::UnresolvedReference { .. } => "UnresolvedReference",
            CliError::InvalidTask(_) => "InvalidTask",
            CliError::NoTasks(_) => "NoTasks",
            CliError::Born(e) => e.code(),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
