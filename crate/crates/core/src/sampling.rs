//! Seeded Monte Carlo detection events and statistical checks of the rate formula and
//! of the expectation formula.
//!
//! # Random streams
//!
//! Every draw comes from xoshiro256++ (`rand_xoshiro::Xoshiro256PlusPlus`). The stream
//! with index `i` under seed `s` is seeded by `seed_from_u64(s ^ i)`, which expands the
//! 64-bit value to the 256-bit state with SplitMix64. Uniform doubles are
//! `(next_u64() >> 11) · 2⁻⁵³`.
//!
//! Events are drawn in blocks of [`BLOCK_SIZE`]; block `b` always uses stream `b`, so
//! merged counts do not depend on how blocks are distributed over worker threads.
//! Within a block, each event takes one uniform `u` and picks the first element whose
//! cumulative probability (in element order) exceeds `u`.

use rand::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{BornError, Result};
use crate::measures::{quantity_expectation, response_probabilities, Detector, QuantumMeasure};
use crate::operators::DensityOperator;

pub type StreamRng = Xoshiro256PlusPlus;

/// Events per independently seeded block.
pub const BLOCK_SIZE: u64 = 1 << 16;

pub const DEFAULT_K_SIGMA: f64 = 5.0;

/// Stream `index` derived from `seed`.
pub fn stream(seed: u64, index: u64) -> StreamRng {
    Xoshiro256PlusPlus::seed_from_u64(seed ^ index)
}

/// Uniform double in `[0, 1)` from the top 53 bits.
#[inline]
pub fn uniform(rng: &mut impl RngCore) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Record of `total` detection events split over detection elements.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventLog {
    pub detector_id: String,
    pub seed: u64,
    pub total: u64,
    pub counts: Vec<u64>,
}

impl EventLog {
    pub fn new(detector_id: impl Into<String>, seed: u64, counts: Vec<u64>) -> Self {
        let total = counts.iter().sum();
        EventLog { detector_id: detector_id.into(), seed, total, counts }
    }

    /// `Σ counts == total`
    pub fn is_consistent(&self) -> bool {
        self.counts.iter().sum::<u64>() == self.total
    }
}

/// Cumulative sums of `probabilities`, with the last nonzero entry pinned to 1.
fn cumulative(probabilities: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    let mut cdf: Vec<f64> = probabilities
        .iter()
        .map(|&q| {
            acc += q;
            acc
        })
        .collect();
    if let Some(last) = probabilities.iter().rposition(|&q| q > 0.0) {
        for v in &mut cdf[last..] {
            *v = 1.0;
        }
    }
    cdf
}

fn draw_block(cdf: &[f64], seed: u64, block: u64, len: u64) -> Vec<u64> {
    let mut rng = stream(seed, block);
    let mut counts = vec![0u64; cdf.len()];
    for _ in 0..len {
        let u = uniform(&mut rng);
        let k = cdf.partition_point(|&c| c <= u);
        counts[k.min(cdf.len() - 1)] += 1;
    }
    counts
}

fn validate_probabilities(probabilities: &[f64]) -> Result<()> {
    if probabilities.is_empty() {
        return Err(BornError::InvalidArgument("empty distribution".into()));
    }
    if let Some((index, &value)) = probabilities.iter().enumerate().find(|(_, q)| q.is_nan() || **q < 0.0) {
        return Err(BornError::NegativeRate { index, value });
    }
    let total: f64 = probabilities.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(BornError::InvalidArgument(format!("probabilities sum to {total}")));
    }
    Ok(())
}

/// `n` categorical draws; blocks run in parallel.
pub fn sample_categorical(probabilities: &[f64], n: u64, seed: u64) -> Result<Vec<u64>> {
    sample_categorical_sharded(probabilities, n, seed, None)
}

/// Same as [`sample_categorical`] with an explicit worker count (`Some(1)` runs on the
/// calling thread). Counts are identical for every worker count.
pub fn sample_categorical_sharded(
    probabilities: &[f64],
    n: u64,
    seed: u64,
    workers: Option<usize>,
) -> Result<Vec<u64>> {
    validate_probabilities(probabilities)?;
    let cdf = cumulative(probabilities);
    let blocks = n.div_ceil(BLOCK_SIZE);
    let block_len = |b: u64| BLOCK_SIZE.min(n - b * BLOCK_SIZE);
    let merge = |mut a: Vec<u64>, b: Vec<u64>| {
        a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
        a
    };
    let zero = || vec![0u64; cdf.len()];
    let counts = match workers {
        Some(1) => (0..blocks).map(|b| draw_block(&cdf, seed, b, block_len(b))).fold(zero(), merge),
        Some(w) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(w)
                .build()
                .map_err(|e| BornError::InvalidArgument(e.to_string()))?;
            pool.install(|| {
                (0..blocks)
                    .into_par_iter()
                    .map(|b| draw_block(&cdf, seed, b, block_len(b)))
                    .reduce(zero, merge)
            })
        }
        None => (0..blocks)
            .into_par_iter()
            .map(|b| draw_block(&cdf, seed, b, block_len(b)))
            .reduce(zero, merge),
    };
    Ok(counts)
}

/// Draws `n` detection events for `rho` from the measure alone.
pub fn sample_measure(
    measure: &QuantumMeasure,
    rho: &DensityOperator,
    n: u64,
    seed: u64,
    id: &str,
) -> Result<EventLog> {
    let q = response_probabilities(measure, rho)?;
    Ok(EventLog::new(id, seed, sample_categorical(&q, n, seed)?))
}

/// `n` i.i.d. detection events with response probabilities `q_k = p_k / tr ρ`.
pub fn sample_events(detector: &Detector, rho: &DensityOperator, n: u64, seed: u64) -> Result<EventLog> {
    sample_measure(detector.measure(), rho, n, seed, detector.id())
}

/// Relative frequencies `counts / total`.
pub fn empirical_rates(log: &EventLog) -> Result<Vec<f64>> {
    if log.total == 0 {
        return Err(BornError::EmptyLog);
    }
    let n = log.total as f64;
    Ok(log.counts.iter().map(|&c| c as f64 / n).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VerificationKind {
    /// Frequencies against `tr ρ P_k / tr ρ`.
    Povm,
    /// Sample mean of scale values against the quantum expectation of `Σ x_k P_k`.
    Expectation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub kind: VerificationKind,
    pub n: u64,
    pub seed: u64,
    pub k_sigma: f64,
    /// `|freq_k − q_k|` per element.
    pub frequency_deviations: Vec<f64>,
    /// `k_sigma·√(q_k(1−q_k)/n) + 1/n` per element.
    pub frequency_bounds: Vec<f64>,
    /// Per scale component, `|sample mean − quantum expectation|` (expectation checks only).
    pub mean_deviations: Vec<f64>,
    /// Per scale component, `k_sigma·std/√n` (expectation checks only).
    pub mean_bounds: Vec<f64>,
    pub pass: bool,
}

impl VerificationReport {
    fn finish(mut self) -> Self {
        let within = |d: &[f64], b: &[f64]| d.iter().zip(b).all(|(x, y)| x <= y);
        self.pass = within(&self.frequency_deviations, &self.frequency_bounds)
            && within(&self.mean_deviations, &self.mean_bounds);
        self
    }
}

/// Compares the frequencies of `log` with `expected` using the binomial bound
/// `k_sigma·√(q(1−q)/n) + 1/n`.
pub fn check_frequencies(log: &EventLog, expected: &[f64], k_sigma: f64) -> Result<VerificationReport> {
    if expected.len() != log.counts.len() {
        return Err(BornError::LengthMismatch { expected: log.counts.len(), found: expected.len() });
    }
    let freq = empirical_rates(log)?;
    let n = log.total as f64;
    let frequency_deviations = freq.iter().zip(expected).map(|(f, q)| (f - q).abs()).collect();
    let frequency_bounds = expected
        .iter()
        .map(|&q| k_sigma * (q * (1.0 - q)).max(0.0).sqrt() / n.sqrt() + 1.0 / n)
        .collect();
    Ok(VerificationReport {
        kind: VerificationKind::Povm,
        n: log.total,
        seed: log.seed,
        k_sigma,
        frequency_deviations,
        frequency_bounds,
        mean_deviations: vec![],
        mean_bounds: vec![],
        pass: false,
    }
    .finish())
}

fn ensure_sample_size(n: u64) -> Result<()> {
    if n < 100 {
        return Err(BornError::InvalidArgument(format!("need n >= 100 events, got {n}")));
    }
    Ok(())
}

/// Samples `n` events and checks every frequency against `tr ρ P_k / tr ρ`.
pub fn verify_born_povm(
    detector: &Detector,
    rho: &DensityOperator,
    n: u64,
    seed: u64,
    k_sigma: f64,
) -> Result<VerificationReport> {
    ensure_sample_size(n)?;
    let q = response_probabilities(detector.measure(), rho)?;
    let log = sample_events(detector, rho, n, seed)?;
    check_frequencies(&log, &q, k_sigma)
}

/// Compares, per scale component, the sample mean of the recorded values with the quantum
/// expectation of the measured quantity. For complex values the deviation is the modulus
/// and the standard deviation is `√(mean |x − x̄|²)`.
pub fn check_sample_mean(
    detector: &Detector,
    log: &EventLog,
    expected: &[num_complex::Complex64],
    k_sigma: f64,
) -> Result<VerificationReport> {
    if log.counts.len() != detector.scale().len() {
        return Err(BornError::LengthMismatch { expected: detector.scale().len(), found: log.counts.len() });
    }
    if expected.len() != detector.scale().width() {
        return Err(BornError::LengthMismatch { expected: detector.scale().width(), found: expected.len() });
    }
    let freq = empirical_rates(log)?;
    let n = log.total as f64;
    let values = detector.scale().values();
    let mut mean_deviations = Vec::with_capacity(expected.len());
    let mut mean_bounds = Vec::with_capacity(expected.len());
    for (j, target) in expected.iter().enumerate() {
        let mean: num_complex::Complex64 = freq.iter().zip(values).map(|(f, x)| x[j] * *f).sum();
        let variance: f64 = freq.iter().zip(values).map(|(f, x)| f * (x[j] - mean).norm_sqr()).sum();
        mean_deviations.push((mean - target).norm());
        mean_bounds.push(k_sigma * variance.sqrt() / n.sqrt() + 1e-12);
    }
    Ok(VerificationReport {
        kind: VerificationKind::Expectation,
        n: log.total,
        seed: log.seed,
        k_sigma,
        frequency_deviations: vec![],
        frequency_bounds: vec![],
        mean_deviations,
        mean_bounds,
        pass: false,
    }
    .finish())
}

/// Samples `n` events and checks the sample mean of the scale values against
/// `⟨X⟩ / tr ρ` for `X = Σ_k x_k P_k`, componentwise.
pub fn verify_born_c(
    detector: &Detector,
    rho: &DensityOperator,
    n: u64,
    seed: u64,
    k_sigma: f64,
) -> Result<VerificationReport> {
    ensure_sample_size(n)?;
    let expected = quantity_expectation(detector, rho)?;
    let log = sample_events(detector, rho, n, seed)?;
    check_sample_mean(detector, &log, &expected, k_sigma)
}
