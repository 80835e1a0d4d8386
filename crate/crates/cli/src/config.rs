//! Experiment configuration schema.
//!
//! Objects live in typed namespaces and are referenced by name from tasks. Matrices are
//! row-major nested arrays of `[re, im]` pairs.

use std::collections::BTreeMap;

use bornkit::wire;
use bornkit::ComplexMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

pub const SCHEMA_VERSION: &str = "1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub version: String,
    #[serde(default)]
    pub constants: BTreeMap<String, f64>,
    #[serde(default)]
    pub objects: Objects,
    pub tasks: Vec<TaskSpec>,
}

impl ExperimentConfig {
    pub fn from_json(bytes: &[u8]) -> CliResult<Self> {
        let config: ExperimentConfig =
            serde_json::from_slice(bytes).map_err(|e| CliError::Parse(e.to_string()))?;
        if config.version != SCHEMA_VERSION {
            return Err(CliError::UnsupportedVersion { found: config.version, expected: SCHEMA_VERSION });
        }
        Ok(config)
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Objects {
    #[serde(default)]
    pub states: BTreeMap<String, StateDef>,
    #[serde(default)]
    pub vectors: BTreeMap<String, VectorDef>,
    #[serde(default)]
    pub operators: BTreeMap<String, OperatorDef>,
    #[serde(default)]
    pub measures: BTreeMap<String, MeasureDef>,
    #[serde(default)]
    pub scales: BTreeMap<String, ScaleDef>,
    #[serde(default)]
    pub detectors: BTreeMap<String, DetectorDef>,
    #[serde(default)]
    pub smatrices: BTreeMap<String, SMatrixDef>,
    #[serde(default)]
    pub calibrations: BTreeMap<String, CalibrationDef>,
    #[serde(default)]
    pub maxent: BTreeMap<String, MaxEntDef>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MatrixDef(#[serde(with = "wire::matrix")] pub ComplexMatrix);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VectorDef(#[serde(with = "wire::complex_vec")] pub Vec<Complex64>);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum StateDef {
    /// Density matrix, validated strictly.
    Matrix(MatrixDef),
    /// Pure state `|ψ⟩⟨ψ|`; the intensity is `‖ψ‖²`.
    Vector(VectorDef),
    MaximallyMixed(usize),
    Empty(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum OperatorDef {
    Matrix(MatrixDef),
    Diagonal(Vec<f64>),
    /// `"x"`, `"y"` or `"z"`.
    Pauli(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum MeasureDef {
    Elements {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        labels: Option<Vec<String>>,
        elements: Vec<MatrixDef>,
    },
    ComputationalBasis(usize),
    Trine,
    /// Spectral projectors of a named operator.
    Spectral(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScaleValue {
    Real(f64),
    RealVector(Vec<f64>),
    /// Components as `[re, im]` pairs.
    Complex(Vec<[f64; 2]>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Factor {
    Number(f64),
    /// Name of an entry in `constants`.
    Constant(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScaleDef {
    pub values: Vec<ScaleValue>,
    #[serde(default)]
    pub units: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub factor: Option<Factor>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectorDef {
    pub measure: String,
    pub scale: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SMatrixDef {
    pub matrix: MatrixDef,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub channel_labels: Option<Vec<String>>,
    /// Accept a non-unitary matrix and flag its transition values instead of rejecting it.
    #[serde(default)]
    pub allow_nonunitary: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrationDef {
    pub states: Vec<String>,
    /// Observed rates `p[j][k]`; when absent they are generated from `measure`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rates: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub measure: Option<String>,
    /// Events per calibration state when generating sampled rates from `measure`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaxEntDef {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    pub operators: Vec<String>,
    pub targets: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_iterations: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TaskKind {
    Validate,
    Rates,
    Sample,
    VerifyBorn,
    Spectral,
    Dilate,
    Tomo,
    Maxent,
    Scatter,
}

impl TaskKind {
    pub fn name(self) -> &'static str {
        match self {
            TaskKind::Validate => "validate",
            TaskKind::Rates => "rates",
            TaskKind::Sample => "sample",
            TaskKind::VerifyBorn => "verify-born",
            TaskKind::Spectral => "spectral",
            TaskKind::Dilate => "dilate",
            TaskKind::Tomo => "tomo",
            TaskKind::Maxent => "maxent",
            TaskKind::Scatter => "scatter",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VerifyMode {
    #[default]
    Povm,
    C,
}

/// One task record. Which references and parameters are used depends on `kind`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    pub kind: TaskKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub state: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub measure: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detector: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub operator: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub smatrix: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub calibration: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub problem: Option<String>,
    /// Reference measure that a tomographic reconstruction is compared with.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub psi_in: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub psi_out: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basis: Option<Vec<String>>,
    /// Operator name of a channel projector.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub projector: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<VerifyMode>,
    /// `block` or `rank_trimmed`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variant: Option<bornkit::dilation::DilationKind>,
    /// Scale component of a detector's measured quantity.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub component: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_sigma: Option<f64>,
    /// Replaces the computed response probabilities in a POVM verification.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected: Option<Vec<f64>>,
}

impl TaskSpec {
    pub fn label(&self, index: usize) -> String {
        self.id.clone().unwrap_or_else(|| format!("task{index}"))
    }
}
