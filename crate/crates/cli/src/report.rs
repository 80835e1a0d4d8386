//! Machine-readable run reports.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{CliError, CliResult};

pub const REPORT_VERSION: &str = "1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    /// The task ran but its verification did not pass.
    Failed,
    Error,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorRecord {
    #[serde(rename = "type")]
    pub kind: String,
    pub message: String,
}

impl From<&CliError> for ErrorRecord {
    fn from(e: &CliError) -> Self {
        ErrorRecord { kind: e.code().to_string(), message: e.to_string() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskRecord {
    pub id: String,
    pub kind: String,
    pub status: Status,
    pub summary: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub result: Option<Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<ErrorRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub report_version: String,
    pub toolkit_version: String,
    /// SHA-256 of the config bytes and the effective overrides.
    pub config_hash: String,
    pub results: Vec<TaskRecord>,
    pub wall_time_ms: u64,
}

impl Report {
    pub fn from_json(bytes: &[u8]) -> CliResult<Self> {
        serde_json::from_slice(bytes).map_err(|e| CliError::Parse(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// 0 when every task succeeded, 1 if any task errored, otherwise 2 if a verification failed.
    pub fn exit_code(&self) -> i32 {
        if self.results.iter().any(|r| r.status == Status::Error) {
            1
        } else if self.results.iter().any(|r| r.status == Status::Failed) {
            2
        } else {
            0
        }
    }

    /// One line per task.
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        for r in &self.results {
            let tag = match r.status {
                Status::Ok => "ok",
                Status::Failed => "FAILED",
                Status::Error => "ERROR",
            };
            out.push_str(&format!("[{tag}] {} ({}): {}\n", r.id, r.kind, r.summary));
        }
        out.push_str(&format!(
            "bornkit {} | config {} | {} task(s) | {} ms\n",
            self.toolkit_version,
            &self.config_hash[..self.config_hash.len().min(12)],
            self.results.len(),
            self.wall_time_ms
        ));
        out
    }
}
