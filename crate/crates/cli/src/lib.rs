//! Command-line harness for bornkit: load an experiment config, run its tasks and emit a
//! JSON report.

pub mod config;
pub mod error;
pub mod report;
pub mod runner;

pub use config::{ExperimentConfig, TaskKind, VerifyMode, SCHEMA_VERSION};
pub use error::{CliError, CliResult};
pub use report::{Report, Status};
pub use runner::{config_hash, run_bytes, Overrides, RunOptions};

/// Reads and runs the config at `path`.
pub fn run_file(path: &std::path::Path, options: &RunOptions) -> CliResult<Report> {
    let bytes = std::fs::read(path)
        .map_err(|e| CliError::Io { path: path.display().to_string(), message: e.to_string() })?;
    run_bytes(&bytes, options)
}
