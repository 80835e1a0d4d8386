//! Object resolution and task execution.

use std::time::Instant;

use bornkit::dilation::{dilated_rates, naimark_dilate_with};
use bornkit::linalg;
use bornkit::measures::{projectivity_deviation, response_probabilities, response_rates};
use bornkit::sampling::{
    check_frequencies, empirical_rates, sample_categorical, sample_measure, verify_born_c,
    verify_born_povm, DEFAULT_K_SIGMA,
};
use bornkit::scattering::{
    degenerate_channel_probability, transition_distribution, transition_probability, SMatrix,
};
use bornkit::spectral::{normality_deviation, spectral_measure, DEFAULT_CLUSTER_TOL};
use bornkit::tomography::maxent::{maxent_state, MaxEntProblem};
use bornkit::tomography::{
    informational_completeness, reconstruct_measure_with, CalibrationSet, ProjectionOptions,
};
use bornkit::wire::{matrix_to_wire, vector_to_wire};
use bornkit::{
    BornError, ComplexMatrix, DensityOperator, Detector, QuantumMeasure, Scale, StateVector,
};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::config::*;
use crate::error::{CliError, CliResult};
use crate::report::{ErrorRecord, Report, Status, TaskRecord, REPORT_VERSION};

/// Values supplied on the command line or by the environment.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub n: Option<u64>,
    pub tol: Option<f64>,
    pub k_sigma: Option<f64>,
    pub mode: Option<VerifyMode>,
    /// Lowest-priority seed, used when neither the command line nor the task sets one.
    pub default_seed: Option<u64>,
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub overrides: Overrides,
    /// Only run tasks of this kind; the run fails when there are none.
    pub only: Option<TaskKind>,
    pub parallel: bool,
}

pub fn config_hash(bytes: &[u8], overrides: &Overrides) -> String {
    let mut h = Sha256::new();
    h.update(bytes);
    h.update(serde_json::to_vec(overrides).expect("overrides serialize"));
    hex::encode(h.finalize())
}

/// Parses `bytes` and runs the selected tasks. Errors are returned only for problems that
/// prevent a report from being produced at all.
pub fn run_bytes(bytes: &[u8], options: &RunOptions) -> CliResult<Report> {
    let start = Instant::now();
    let config = ExperimentConfig::from_json(bytes)?;
    let selected: Vec<(usize, &TaskSpec)> = config
        .tasks
        .iter()
        .enumerate()
        .filter(|(_, t)| options.only.is_none_or(|k| t.kind == k))
        .collect();
    if let Some(kind) = options.only {
        if selected.is_empty() {
            return Err(CliError::NoTasks(kind.name().to_string()));
        }
    }
    let ctx = Context { config: &config, overrides: &options.overrides };
    let run_one = |&(i, task): &(usize, &TaskSpec)| ctx.record(i, task);
    let results = if options.parallel {
        selected.par_iter().map(run_one).collect()
    } else {
        selected.iter().map(run_one).collect()
    };
    Ok(Report {
        report_version: REPORT_VERSION.to_string(),
        toolkit_version: env!("CARGO_PKG_VERSION").to_string(),
        config_hash: config_hash(bytes, &options.overrides),
        results,
        wall_time_ms: start.elapsed().as_millis() as u64,
    })
}

struct Outcome {
    summary: String,
    result: Value,
    passed: bool,
}

impl Outcome {
    fn ok(summary: String, result: Value) -> Self {
        Outcome { summary, result, passed: true }
    }
}

struct Context<'a> {
    config: &'a ExperimentConfig,
    overrides: &'a Overrides,
}

fn lookup<'m, T>(
    map: &'m std::collections::BTreeMap<String, T>,
    kind: &'static str,
    name: &str,
) -> CliResult<&'m T> {
    map.get(name).ok_or_else(|| CliError::UnresolvedReference { kind, name: name.to_string() })
}

fn required<'t>(field: &'t Option<String>, what: &str) -> CliResult<&'t str> {
    field.as_deref().ok_or_else(|| CliError::InvalidTask(format!("missing `{what}` reference")))
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("result serializes")
}

fn matrix_value(m: &ComplexMatrix) -> Value {
    to_value(&matrix_to_wire(m))
}

/// Default cluster tolerance in the units of `x`, so quantities in SI units are not merged.
pub fn default_cluster_tol(x: &ComplexMatrix) -> f64 {
    let scale = linalg::max_abs_entry(x);
    if scale > 0.0 { DEFAULT_CLUSTER_TOL * scale } else { DEFAULT_CLUSTER_TOL }
}

/// Fixed-precision rendering for summaries.
pub fn fmt_num(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if x.abs() < 1e-4 || x.abs() >= 1e7 {
        return format!("{x:.6e}");
    }
    let s = format!("{x:.6}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" { "0".to_string() } else { s.to_string() }
}

fn fmt_complex(z: Complex64) -> String {
    if z.im.abs() <= 1e-12 * z.re.abs().max(1.0) {
        fmt_num(z.re)
    } else {
        let sign = if z.im < 0.0 { "-" } else { "+" };
        format!("{}{}{}i", fmt_num(z.re), sign, fmt_num(z.im.abs()))
    }
}

fn fmt_list<T>(xs: &[T], f: impl Fn(&T) -> String) -> String {
    format!("[{}]", xs.iter().map(f).collect::<Vec<_>>().join(", "))
}

impl Context<'_> {
    fn objects(&self) -> &Objects {
        &self.config.objects
    }

    fn seed(&self, task: &TaskSpec) -> u64 {
        self.overrides.seed.or(task.seed).or(self.overrides.default_seed).unwrap_or(0)
    }

    fn n(&self, task: &TaskSpec) -> CliResult<u64> {
        self.overrides
            .n
            .or(task.n)
            .ok_or_else(|| CliError::InvalidTask("missing event count `n`".to_string()))
    }

    fn tol(&self, task: &TaskSpec) -> Option<f64> {
        self.overrides.tol.or(task.tol)
    }

    fn record(&self, index: usize, task: &TaskSpec) -> TaskRecord {
        let id = task.label(index);
        let kind = task.kind.name().to_string();
        match self.execute(task) {
            Ok(o) => TaskRecord {
                id,
                kind,
                status: if o.passed { Status::Ok } else { Status::Failed },
                summary: o.summary,
                result: Some(o.result),
                error: None,
            },
            Err(e) => TaskRecord {
                id,
                kind,
                status: Status::Error,
                summary: format!("{}: {e}", e.code()),
                result: None,
                error: Some(ErrorRecord::from(&e)),
            },
        }
    }

    fn execute(&self, task: &TaskSpec) -> CliResult<Outcome> {
        match task.kind {
            TaskKind::Validate => self.validate(task),
            TaskKind::Rates => self.rates(task),
            TaskKind::Sample => self.sample(task),
            TaskKind::VerifyBorn => self.verify_born(task),
            TaskKind::Spectral => self.spectral(task),
            TaskKind::Dilate => self.dilate(task),
            TaskKind::Tomo => self.tomo(task),
            TaskKind::Maxent => self.maxent(task),
            TaskKind::Scatter => self.scatter(task),
        }
    }

    pub fn state(&self, name: &str) -> CliResult<DensityOperator> {
        Ok(match lookup(&self.objects().states, "state", name)? {
            StateDef::Matrix(m) => DensityOperator::new(m.0.clone())?,
            StateDef::Vector(v) => DensityOperator::pure(&StateVector::from_slice(&v.0)),
            StateDef::MaximallyMixed(d) => DensityOperator::maximally_mixed(*d),
            StateDef::Empty(d) => DensityOperator::empty(*d),
        })
    }

    fn vector(&self, name: &str) -> CliResult<StateVector> {
        Ok(StateVector::from_slice(&lookup(&self.objects().vectors, "vector", name)?.0))
    }

    fn operator(&self, name: &str) -> CliResult<ComplexMatrix> {
        Ok(match lookup(&self.objects().operators, "operator", name)? {
            OperatorDef::Matrix(m) => m.0.clone(),
            OperatorDef::Diagonal(d) => linalg::diag_real(d),
            OperatorDef::Pauli(axis) => match axis.as_str() {
                "x" => linalg::sigma_x(),
                "y" => linalg::sigma_y(),
                "z" => linalg::sigma_z(),
                other => return Err(CliError::InvalidTask(format!("unknown Pauli axis {other:?}"))),
            },
        })
    }

    fn measure(&self, name: &str) -> CliResult<QuantumMeasure> {
        Ok(match lookup(&self.objects().measures, "measure", name)? {
            MeasureDef::Elements { labels, elements } => {
                let elements = elements.iter().map(|m| m.0.clone()).collect();
                match labels {
                    Some(l) => QuantumMeasure::new(elements, l.clone())?,
                    None => QuantumMeasure::unlabeled(elements)?,
                }
            }
            MeasureDef::ComputationalBasis(d) => QuantumMeasure::computational_basis(*d),
            MeasureDef::Trine => QuantumMeasure::trine(),
            MeasureDef::Spectral(op) => {
                let x = self.operator(op)?;
                spectral_measure(&x, default_cluster_tol(&x))?.projectors
            }
        })
    }

    fn constant(&self, name: &str) -> CliResult<f64> {
        self.config
            .constants
            .get(name)
            .copied()
            .ok_or_else(|| CliError::UnresolvedReference { kind: "constant", name: name.to_string() })
    }

    fn scale(&self, name: &str) -> CliResult<Scale> {
        let def = lookup(&self.objects().scales, "scale", name)?;
        let values = def
            .values
            .iter()
            .map(|v| match v {
                ScaleValue::Real(x) => vec![Complex64::new(*x, 0.0)],
                ScaleValue::RealVector(xs) => xs.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
                ScaleValue::Complex(zs) => zs.iter().map(|z| Complex64::new(z[0], z[1])).collect(),
            })
            .collect();
        let scale = Scale::new(values, def.units.clone())?;
        Ok(match &def.factor {
            None => scale,
            Some(Factor::Number(f)) => scale.scaled(*f),
            Some(Factor::Constant(c)) => scale.scaled(self.constant(c)?),
        })
    }

    fn detector(&self, name: &str) -> CliResult<Detector> {
        let def = lookup(&self.objects().detectors, "detector", name)?;
        Ok(Detector::new(self.measure(&def.measure)?, self.scale(&def.scale)?)?.with_id(name))
    }

    fn smatrix(&self, name: &str) -> CliResult<SMatrix> {
        let def = lookup(&self.objects().smatrices, "smatrix", name)?;
        let labels = def
            .channel_labels
            .clone()
            .unwrap_or_else(|| (0..def.matrix.0.nrows()).map(|k| k.to_string()).collect());
        Ok(if def.allow_nonunitary {
            SMatrix::new_unchecked(def.matrix.0.clone(), labels)?
        } else {
            SMatrix::new(def.matrix.0.clone(), labels)?
        })
    }

    fn calibration(&self, name: &str, seed: u64) -> CliResult<CalibrationSet> {
        let def = lookup(&self.objects().calibrations, "calibration", name)?;
        let states: Vec<DensityOperator> =
            def.states.iter().map(|s| self.state(s)).collect::<CliResult<_>>()?;
        if let Some(rates) = &def.rates {
            return Ok(CalibrationSet::new(states, rates.clone())?);
        }
        let measure = self.measure(def.measure.as_deref().ok_or_else(|| {
            CliError::InvalidTask(format!("calibration {name:?} needs `rates` or `measure`"))
        })?)?;
        match self.overrides.n.or(def.n) {
            None => Ok(CalibrationSet::from_measure(states, &measure)?),
            Some(n) => {
                let rates = states
                    .iter()
                    .enumerate()
                    .map(|(j, rho)| {
                        let q = response_probabilities(&measure, rho)?;
                        let counts = sample_categorical(&q, n, seed.wrapping_add(j as u64))?;
                        Ok(counts.iter().map(|&c| c as f64 / n as f64 * rho.intensity()).collect())
                    })
                    .collect::<CliResult<Vec<Vec<f64>>>>()?;
                Ok(CalibrationSet::with_tolerance(states, rates, 1e-6)?)
            }
        }
    }

    fn maxent_problem(&self, name: &str) -> CliResult<MaxEntProblem> {
        let def = lookup(&self.objects().maxent, "maxent", name)?;
        let operators: Vec<ComplexMatrix> =
            def.operators.iter().map(|o| self.operator(o)).collect::<CliResult<_>>()?;
        let dim = match (def.dim, operators.first()) {
            (Some(d), _) => d,
            (None, Some(op)) => op.nrows(),
            (None, None) => {
                return Err(CliError::InvalidTask(format!("maxent problem {name:?} needs `dim`")))
            }
        };
        let mut problem = MaxEntProblem::new(dim, operators, def.targets.clone())?;
        if let Some(t) = def.tolerance {
            problem.tolerance = t;
        }
        if let Some(m) = def.max_iterations {
            problem.max_iterations = m;
        }
        Ok(problem)
    }

    /// Measure named directly or through a detector.
    fn task_measure(&self, task: &TaskSpec) -> CliResult<QuantumMeasure> {
        match (&task.measure, &task.detector) {
            (Some(m), _) => self.measure(m),
            (None, Some(d)) => Ok(self.detector(d)?.measure().clone()),
            (None, None) => Err(CliError::InvalidTask("missing `measure` or `detector` reference".into())),
        }
    }

    fn validate(&self, task: &TaskSpec) -> CliResult<Outcome> {
        let mut checked = Vec::new();
        let mut parts = Vec::new();
        if let Some(name) = &task.state {
            let rho = self.state(name)?;
            checked.push(json!({"type": "state", "name": name, "dim": rho.dim(), "intensity": rho.intensity()}));
            parts.push(format!("state {name} (dim {}, intensity {})", rho.dim(), fmt_num(rho.intensity())));
        }
        if let Some(name) = &task.measure {
            let m = self.measure(name)?;
            let proj = projectivity_deviation(&m);
            checked.push(json!({
                "type": "measure", "name": name, "dim": m.dim(), "elements": m.len(),
                "labels": m.labels(), "projectivity_deviation": proj,
            }));
            parts.push(format!("measure {name} (dim {}, {} elements)", m.dim(), m.len()));
        }
        if let Some(name) = &task.detector {
            let d = self.detector(name)?;
            checked.push(json!({"type": "detector", "name": name, "elements": d.measure().len(), "width": d.scale().width()}));
            parts.push(format!("detector {name}"));
        }
        if let Some(name) = &task.operator {
            let x = self.operator(name)?;
            checked.push(json!({
                "type": "operator", "name": name, "dim": x.nrows(),
                "hermitian_deviation": linalg::hermitian_deviation(&x),
                "normality_deviation": normality_deviation(&x),
            }));
            parts.push(format!("operator {name}"));
        }
        if let Some(name) = &task.smatrix {
            let s = self.smatrix(name)?;
            checked.push(json!({"type": "smatrix", "name": name, "dim": s.dim(), "unitarity_deviation": s.unitarity_deviation()}));
            parts.push(format!("smatrix {name}"));
        }
        if let Some(name) = &task.calibration {
            let cal = self.calibration(name, self.seed(task))?;
            let report = informational_completeness(cal.states())?;
            checked.push(json!({"type": "calibration", "name": name, "completeness": to_value(&report)}));
            parts.push(format!("calibration {name} (rank {}/{})", report.rank, report.required));
        }
        if let Some(name) = &task.problem {
            let p = self.maxent_problem(name)?;
            checked.push(json!({"type": "maxent", "name": name, "dim": p.dim(), "constraints": p.targets().len()}));
            parts.push(format!("maxent problem {name}"));
        }
        if checked.is_empty() {
            return Err(CliError::InvalidTask("validate task references no objects".into()));
        }
        Ok(Outcome::ok(format!("valid: {}", parts.join(", ")), json!({ "checked": checked })))
    }

    fn rates(&self, task: &TaskSpec) -> CliResult<Outcome> {
        let measure = self.task_measure(task)?;
        let rho = self.state(required(&task.state, "state")?)?;
        let rates = response_rates(&measure, &rho)?;
        let probabilities = response_probabilities(&measure, &rho)?;
        Ok(Outcome::ok(
            format!("rates = {}", fmt_list(&rates, |x| fmt_num(*x))),
            json!({
                "labels": measure.labels(),
                "rates": rates,
                "probabilities": probabilities,
                "intensity": rho.intensity(),
            }),
        ))
    }

    fn sample(&self, task: &TaskSpec) -> CliResult<Outcome> {
        let rho = self.state(required(&task.state, "state")?)?;
        let n = self.n(task)?;
        let seed = self.seed(task);
        let (measure, id) = match (&task.detector, &task.measure) {
            (Some(d), _) => (self.detector(d)?.measure().clone(), d.clone()),
            (None, Some(m)) => (self.measure(m)?, m.clone()),
            _ => return Err(CliError::InvalidTask("missing `measure` or `detector` reference".into())),
        };
        let log = sample_measure(&measure, &rho, n, seed, &id)?;
        let freq = empirical_rates(&log)?;
        Ok(Outcome::ok(
            format!("n = {n}, seed = {seed}, counts = {}", fmt_list(&log.counts, |c| c.to_string())),
            json!({ "log": to_value(&log), "frequencies": freq, "labels": measure.labels() }),
        ))
    }

    fn verify_born(&self, task: &TaskSpec) -> CliResult<Outcome> {
        let rho = self.state(required(&task.state, "state")?)?;
        let n = self.n(task)?;
        let seed = self.seed(task);
        let k_sigma = self.overrides.k_sigma.or(task.k_sigma).unwrap_or(DEFAULT_K_SIGMA);
        let mode = self.overrides.mode.or(task.mode).unwrap_or_default();
        let report = match mode {
            VerifyMode::Povm => {
                let detector = match (&task.detector, &task.measure) {
                    (Some(d), _) => self.detector(d)?,
                    (None, Some(m)) => {
                        let measure = self.measure(m)?;
                        let zeros = vec![0.0; measure.len()];
                        Detector::new(measure, Scale::real(&zeros))?.with_id(m.as_str())
                    }
                    _ => return Err(CliError::InvalidTask("missing `measure` or `detector` reference".into())),
                };
                match &task.expected {
                    None => verify_born_povm(&detector, &rho, n, seed, k_sigma)?,
                    Some(q) => {
                        if n < 100 {
                            return Err(BornError::InvalidArgument(format!("need n >= 100 events, got {n}")).into());
                        }
                        let log = sample_measure(detector.measure(), &rho, n, seed, detector.id())?;
                        check_frequencies(&log, q, k_sigma)?
                    }
                }
            }
            VerifyMode::C => {
                if task.expected.is_some() {
                    return Err(CliError::InvalidTask("`expected` applies to povm mode only".into()));
                }
                let detector = self.detector(required(&task.detector, "detector")?)?;
                verify_born_c(&detector, &rho, n, seed, k_sigma)?
            }
        };
        let (dev, bound) = if report.frequency_deviations.is_empty() {
            (&report.mean_deviations, &report.mean_bounds)
        } else {
            (&report.frequency_deviations, &report.frequency_bounds)
        };
        let worst = dev.iter().zip(bound).map(|(d, b)| d / b).fold(0.0, f64::max);
        let summary = format!(
            "{} (n = {n}, seed = {seed}, worst deviation {} of the {k_sigma}-sigma bound)",
            if report.pass { "pass" } else { "FAIL" },
            fmt_num(worst)
        );
        Ok(Outcome { summary, passed: report.pass, result: to_value(&report) })
    }

    fn spectral(&self, task: &TaskSpec) -> CliResult<Outcome> {
        let x = match (&task.operator, &task.detector) {
            (Some(op), _) => self.operator(op)?,
            (None, Some(d)) => {
                let quantity = self.detector(d)?.measured_quantity();
                let j = task.component.unwrap_or(0);
                let width = quantity.len();
                quantity.into_iter().nth(j).ok_or_else(|| {
                    CliError::InvalidTask(format!("component {j} out of range for scale width {width}"))
                })?
            }
            _ => return Err(CliError::InvalidTask("missing `operator` or `detector` reference".into())),
        };
        let decomp = spectral_measure(&x, self.tol(task).unwrap_or_else(|| default_cluster_tol(&x)))?;
        let reconstruction_error = linalg::frobenius(&(decomp.reconstruct() - &x));
        let mut result = json!({
            "eigenvalues": to_value(&decomp.eigenvalues.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>()),
            "multiplicities": decomp.multiplicities(),
            "projectors": decomp.projectors.elements().iter().map(matrix_value).collect::<Vec<_>>(),
            "reconstruction_error": reconstruction_error,
            "normality_deviation": normality_deviation(&x),
        });
        if let Some(s) = &task.state {
            let rho = self.state(s)?;
            result["probabilities"] = to_value(&response_probabilities(&decomp.projectors, &rho)?);
        }
        Ok(Outcome::ok(format!("eigenvalues = {}", fmt_list(&decomp.eigenvalues, |z| fmt_complex(*z))), result))
    }

    fn dilate(&self, task: &TaskSpec) -> CliResult<Outcome> {
        let measure = self.task_measure(task)?;
        let dil = naimark_dilate_with(&measure, task.variant.unwrap_or_default())?;
        let reconstruction = dil.reconstruction_deviation(&measure);
        let mut result = json!({
            "source_dim": dil.source_dim(),
            "dilated_dim": dil.dilated_dim(),
            "isometry": matrix_value(&dil.isometry),
            "isometry_deviation": dil.isometry_deviation(),
            "reconstruction_deviation": reconstruction,
            "projectivity_deviation": projectivity_deviation(&dil.projective_measure),
        });
        if let Some(s) = &task.state {
            let rho = self.state(s)?;
            let direct = response_rates(&measure, &rho)?;
            let lifted = dilated_rates(&dil, &rho)?;
            let max_dev = direct.iter().zip(&lifted).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            result["rates"] = json!({"direct": direct, "dilated": lifted, "max_deviation": max_dev});
        }
        Ok(Outcome::ok(
            format!("D = {}, reconstruction deviation {}", dil.dilated_dim(), fmt_num(reconstruction)),
            result,
        ))
    }

    fn tomo(&self, task: &TaskSpec) -> CliResult<Outcome> {
        let cal = self.calibration(required(&task.calibration, "calibration")?, self.seed(task))?;
        let mut options = ProjectionOptions::default();
        if let Some(t) = self.tol(task) {
            options.exit_tol = t;
        }
        let rec = reconstruct_measure_with(&cal, options)?;
        let mut result = json!({
            "labels": rec.measure.labels(),
            "elements": rec.measure.elements().iter().map(matrix_value).collect::<Vec<_>>(),
            "residual": rec.residual,
            "projection_distance": rec.projection_distance,
            "iterations": rec.iterations,
        });
        let mut summary = format!("{} elements, residual {}", rec.measure.len(), fmt_num(rec.residual));
        if let Some(r) = &task.reference {
            let reference = self.measure(r)?;
            if reference.len() != rec.measure.len() {
                return Err(BornError::LengthMismatch { expected: rec.measure.len(), found: reference.len() }.into());
            }
            let errors: Vec<f64> = rec
                .measure
                .elements()
                .iter()
                .zip(reference.elements())
                .map(|(a, b)| linalg::frobenius(&(a - b)))
                .collect();
            let worst = errors.iter().copied().fold(0.0, f64::max);
            summary.push_str(&format!(", max element error {worst:.3e}"));
            result["element_errors"] = to_value(&errors);
        }
        Ok(Outcome::ok(summary, result))
    }

    fn maxent(&self, task: &TaskSpec) -> CliResult<Outcome> {
        let mut problem = self.maxent_problem(required(&task.problem, "problem")?)?;
        if let Some(t) = self.tol(task) {
            problem.tolerance = t;
        }
        let sol = maxent_state(&problem)?;
        Ok(Outcome::ok(
            format!(
                "entropy {}, multipliers {}, {} iterations",
                fmt_num(sol.entropy),
                fmt_list(&sol.multipliers, |x| fmt_num(*x)),
                sol.iterations
            ),
            json!({
                "state": matrix_value(sol.state.matrix()),
                "multipliers": sol.multipliers,
                "iterations": sol.iterations,
                "max_residual": sol.max_residual,
                "entropy": sol.entropy,
            }),
        ))
    }

    fn scatter(&self, task: &TaskSpec) -> CliResult<Outcome> {
        let s = self.smatrix(required(&task.smatrix, "smatrix")?)?;
        let psi_in = self.vector(required(&task.psi_in, "psi_in")?)?;
        let unitarity = s.unitarity_deviation();
        if let Some(out) = &task.psi_out {
            let t = transition_probability(&s, &psi_in, &self.vector(out)?)?;
            let flag = if t.nonunitary { " (S not unitary)" } else { "" };
            return Ok(Outcome::ok(
                format!("probability = {}{flag}", fmt_num(t.probability)),
                json!({"probability": t.probability, "nonunitary": t.nonunitary, "unitarity_deviation": unitarity}),
            ));
        }
        if let Some(basis) = &task.basis {
            let vectors = basis
                .iter()
                .map(|b| Ok(self.vector(b)?.amplitudes().clone()))
                .collect::<CliResult<Vec<_>>>()?;
            let dist = transition_distribution(&s, &psi_in, &vectors)?;
            let total: f64 = dist.iter().sum();
            return Ok(Outcome::ok(
                format!("distribution = {}", fmt_list(&dist, |x| fmt_num(*x))),
                json!({"distribution": dist, "sum": total, "unitarity_deviation": unitarity}),
            ));
        }
        if let Some(p) = &task.projector {
            let prob = degenerate_channel_probability(&s, &psi_in, &self.operator(p)?)?;
            return Ok(Outcome::ok(
                format!("channel probability = {}", fmt_num(prob)),
                json!({"probability": prob, "unitarity_deviation": unitarity}),
            ));
        }
        let out = s.matrix() * psi_in.amplitudes();
        Ok(Outcome::ok(
            format!("out state norm² = {}", fmt_num(out.norm_squared())),
            json!({"out_state": to_value(&vector_to_wire(&out)), "unitarity_deviation": unitarity}),
        ))
    }
}
