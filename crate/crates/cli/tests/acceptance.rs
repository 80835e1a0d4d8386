//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits nonzero if any fails.
//!
//! Set `BORNKIT_UPDATE_GOLDEN=1` to rewrite the golden report.

use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use bornkit::dilation::{dilated_rates, naimark_dilate};
use bornkit::linalg::{self, c, ComplexMatrix};
use bornkit::measures::{
    drp_linearity_report, projectivity_deviation, response_probabilities, Detector, QuantumMeasure, Scale,
};
use bornkit::operators::{pure_state, uncertainty_product_report, DensityOperator, StateVector};
use bornkit::random;
use bornkit::sampling::{check_frequencies, sample_categorical, stream, verify_born_c, verify_born_povm, StreamRng};
use bornkit::scattering::{
    channel_sum_probability, degenerate_channel_probability, transition_distribution, transition_probability,
    SMatrix,
};
use bornkit::spectral::spectral_measure;
use bornkit::tomography::maxent::{maxent_state, MaxEntProblem};
use bornkit::tomography::{pauli_calibration_states, reconstruct_measure, CalibrationSet};
use bornkit::BornError;
use bornkit_cli::{run_bytes, Report, RunOptions, Status};
use rand::Rng;

type Check = Result<String, String>;

/// Name, check and runtime limit in seconds.
type Criterion = (&'static str, fn() -> Check, u64);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok { Ok(()) } else { Err(msg()) }
}

fn rng(criterion: u64) -> StreamRng {
    stream(0xB0A7 + criterion, 0)
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests").join(name)
}

fn ket(amps: &[f64]) -> DensityOperator {
    pure_state(&StateVector::from_real(amps))
}

fn raw_rates(measure: &QuantumMeasure, rho: &DensityOperator) -> Vec<f64> {
    measure.elements().iter().map(|p| linalg::trace_product(rho.matrix(), p).re).collect()
}

fn measure_validity() -> Check {
    let mut r = rng(1);
    let (mut worst_sum, mut worst_neg, mut worst_drp) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..500 {
        let d = r.random_range(2..=6);
        let k = r.random_range(1..=6);
        let m = random::measure(&mut r, d, k).map_err(|e| e.to_string())?;
        let intensity = r.random_range(0.1..10.0);
        let rho = random::density(&mut r, d).scaled(intensity);
        let raw = raw_rates(&m, &rho);
        let sum: f64 = raw.iter().sum();
        worst_sum = worst_sum.max((sum - rho.intensity()).abs() / rho.intensity());
        worst_neg = worst_neg.min(raw.iter().copied().fold(f64::INFINITY, f64::min));
        let other = random::density(&mut r, d);
        let (a, b) = (r.random_range(0.0..3.0), r.random_range(0.0..3.0));
        let drp = drp_linearity_report(&m, &rho, &other, a, b).map_err(|e| e.to_string())?;
        let scale = (a * rho.intensity() + b).max(1.0);
        worst_drp = worst_drp.max(drp.linearity_deviation.max(drp.completeness_deviation) / scale);
    }
    ensure(worst_sum <= 1e-10, || format!("completeness {worst_sum:.2e} > 1e-10"))?;
    ensure(worst_neg >= -1e-12, || format!("rate {worst_neg:.2e} < -1e-12"))?;
    ensure(worst_drp <= 1e-10, || format!("DRP deviation {worst_drp:.2e} > 1e-10"))?;
    Ok(format!("500 pairs; completeness {worst_sum:.1e}, min rate {worst_neg:.1e}, DRP {worst_drp:.1e}"))
}

fn born_povm_sampling() -> Check {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let states = [("|0>", ket(&[1.0, 0.0])), ("|+>", ket(&[s, s])), ("I/2", DensityOperator::maximally_mixed(2))];
    let detectors = [
        ("z", Detector::new(QuantumMeasure::computational_basis(2), Scale::real(&[1.0, -1.0])).unwrap()),
        ("trine", Detector::new(QuantumMeasure::trine(), Scale::real(&[0.0, 1.0, 2.0])).unwrap()),
    ];
    let n = 100_000;
    let mut seed = 100;
    let mut worst = 0.0f64;
    for (dn, det) in &detectors {
        for (sn, rho) in &states {
            seed += 1;
            let rep = verify_born_povm(det, rho, n, seed, 5.0).map_err(|e| e.to_string())?;
            ensure(rep.pass, || format!("{dn} on {sn} failed: {:?}", rep.frequency_deviations))?;
            for (d, b) in rep.frequency_deviations.iter().zip(&rep.frequency_bounds) {
                worst = worst.max(d / b);
            }
        }
    }
    let trine = QuantumMeasure::trine();
    let q = response_probabilities(&trine, &states[0].1).unwrap();
    for (a, b) in q.iter().zip([2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0]) {
        ensure((a - b).abs() < 1e-12, || format!("trine on |0> probabilities {q:?}"))?;
    }
    // adversarial fixture: events from |0> checked against the uniform distribution
    let counts = sample_categorical(&q, n, 7).unwrap();
    let log = bornkit::sampling::EventLog::new("trine", 7, counts);
    let wrong = check_frequencies(&log, &[1.0 / 3.0; 3], 5.0).unwrap();
    ensure(!wrong.pass, || "wrong-distribution fixture passed".into())?;
    let bytes = std::fs::read(fixture("fixtures/corrupted_rates.json")).unwrap();
    let report = run_bytes(&bytes, &RunOptions::default()).map_err(|e| e.to_string())?;
    ensure(report.exit_code() == 2, || format!("corrupted config exit code {}", report.exit_code()))?;
    Ok(format!("6 detector/state pairs within 5 sigma (worst {worst:.2} of bound); adversarial fixtures fail"))
}

fn born_c_sampling() -> Check {
    let mut r = rng(3);
    let n = 100_000;
    let mut worst = 0.0f64;
    let mut complex_pairs = 0;
    for i in 0..20u64 {
        let d = r.random_range(2..=4);
        let k = r.random_range(2..=5);
        let m = random::measure(&mut r, d, k).map_err(|e| e.to_string())?;
        let scale = if i % 2 == 0 {
            complex_pairs += 1;
            let values = (0..k)
                .map(|_| (0..2).map(|_| c(r.random_range(-2.0..2.0), r.random_range(-2.0..2.0))).collect())
                .collect();
            Scale::new(values, "").unwrap()
        } else {
            Scale::real(&(0..k).map(|_| r.random_range(-3.0..3.0)).collect::<Vec<_>>())
        };
        let det = Detector::new(m, scale).unwrap();
        let rho = random::density(&mut r, d);
        let rep = verify_born_c(&det, &rho, n, 300 + i, 5.0).map_err(|e| e.to_string())?;
        ensure(rep.pass, || format!("pair {i} failed: {:?} vs {:?}", rep.mean_deviations, rep.mean_bounds))?;
        for (dv, b) in rep.mean_deviations.iter().zip(&rep.mean_bounds) {
            worst = worst.max(dv / b);
        }
    }
    Ok(format!("20 pairs ({complex_pairs} with complex-vector scales); worst {worst:.2} of 5 sigma bound"))
}

fn spectral_round_trip() -> Check {
    let mut r = rng(4);
    let (mut worst_rec, mut worst_orth) = (0.0f64, 0.0f64);
    for _ in 0..500 {
        let d = r.random_range(2..=8);
        let x = random::hermitian(&mut r, d);
        let sd = spectral_measure(&x, 1e-8).map_err(|e| e.to_string())?;
        worst_rec = worst_rec.max(linalg::frobenius(&(sd.reconstruct() - &x)));
        worst_orth = worst_orth.max(projectivity_deviation(&sd.projectors));
    }
    ensure(worst_rec <= 1e-9, || format!("reconstruction {worst_rec:.2e} > 1e-9"))?;
    ensure(worst_orth <= 1e-8, || format!("orthogonality {worst_orth:.2e} > 1e-8"))?;
    let deg = spectral_measure(&linalg::diag_real(&[2.0, 2.0, 5.0]), 1e-8).map_err(|e| e.to_string())?;
    ensure(deg.len() == 2, || format!("diag(2,2,5) gave {} clusters", deg.len()))?;
    Ok(format!("500 matrices; reconstruction {worst_rec:.1e}, P_jP_k {worst_orth:.1e}; diag(2,2,5) has 2 clusters"))
}

fn naimark() -> Check {
    let mut r = rng(5);
    let (mut rates, mut iso, mut proj) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..200 {
        let d = r.random_range(2..=5);
        let k = r.random_range(1..=6);
        let m = random::measure(&mut r, d, k).map_err(|e| e.to_string())?;
        let rho = random::density(&mut r, d);
        let dil = naimark_dilate(&m).map_err(|e| e.to_string())?;
        let lifted = dilated_rates(&dil, &rho).map_err(|e| e.to_string())?;
        let direct = raw_rates(&m, &rho);
        for (a, b) in lifted.iter().zip(&direct) {
            rates = rates.max((a - b).abs());
        }
        iso = iso.max(dil.isometry_deviation());
        proj = proj.max(projectivity_deviation(&dil.projective_measure));
    }
    ensure(rates <= 1e-9, || format!("rates {rates:.2e} > 1e-9"))?;
    ensure(iso <= 1e-10, || format!("V*V - I {iso:.2e} > 1e-10"))?;
    ensure(proj <= 1e-10, || format!("projectivity {proj:.2e} > 1e-10"))?;
    Ok(format!("200 dilations; rates {rates:.1e}, isometry {iso:.1e}, projectivity {proj:.1e}"))
}

fn tomography() -> Check {
    let mut r = rng(6);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let d = r.random_range(2..=4);
        let k = r.random_range(2..=5);
        let m = random::measure(&mut r, d, k).map_err(|e| e.to_string())?;
        let states: Vec<DensityOperator> = (0..d * d + 2).map(|_| random::density(&mut r, d)).collect();
        let cal = CalibrationSet::from_measure(states, &m).map_err(|e| e.to_string())?;
        let rec = reconstruct_measure(&cal).map_err(|e| e.to_string())?;
        for (a, b) in rec.measure.elements().iter().zip(m.elements()) {
            worst = worst.max(linalg::frobenius(&(a - b)));
        }
    }
    ensure(worst <= 1e-7, || format!("exact reconstruction error {worst:.2e} > 1e-7"))?;

    let deficient = pauli_calibration_states()[..3].to_vec();
    let cal = CalibrationSet::from_measure(deficient, &QuantumMeasure::trine()).unwrap();
    ensure(matches!(reconstruct_measure(&cal), Err(BornError::RankDeficient { .. })), || {
        "deficient calibration did not raise RankDeficient".into()
    })?;

    let n = 1_000_000u64;
    let trine = QuantumMeasure::trine();
    let states = pauli_calibration_states();
    let rates = states
        .iter()
        .enumerate()
        .map(|(j, rho)| {
            let q = response_probabilities(&trine, rho).unwrap();
            let counts = sample_categorical(&q, n, 600 + j as u64).unwrap();
            counts.iter().map(|&c| c as f64 / n as f64 * rho.intensity()).collect()
        })
        .collect();
    let cal = CalibrationSet::with_tolerance(states, rates, 1e-6).map_err(|e| e.to_string())?;
    let rec = reconstruct_measure(&cal).map_err(|e| e.to_string())?;
    let bound = 20.0 / (n as f64).sqrt();
    let sampled = rec
        .measure
        .elements()
        .iter()
        .zip(trine.elements())
        .map(|(a, b)| linalg::frobenius(&(a - b)))
        .fold(0.0, f64::max);
    ensure(sampled <= bound, || format!("sampled reconstruction {sampled:.2e} > {bound:.0e}"))?;
    Ok(format!("100 exact ({worst:.1e}); RankDeficient raised; sampled n=1e6 error {sampled:.1e} <= {bound:.0e}"))
}

fn maxent() -> Check {
    let sol = maxent_state(&MaxEntProblem::new(2, vec![linalg::sigma_z()], vec![0.5]).unwrap())
        .map_err(|e| e.to_string())?;
    let target = linalg::diag_real(&[0.75, 0.25]);
    let closed = linalg::max_abs_entry(&(sol.state.matrix() - &target));
    ensure(closed <= 1e-8, || format!("<sz>=0.5 state off by {closed:.2e}"))?;

    for d in 2..=5 {
        let free = maxent_state(&MaxEntProblem::new(d, vec![], vec![]).unwrap()).map_err(|e| e.to_string())?;
        let dev = linalg::max_abs_entry(&(free.state.matrix() - DensityOperator::maximally_mixed(d).matrix()));
        ensure(dev <= 1e-12, || format!("unconstrained d={d} off I/d by {dev:.2e}"))?;
    }

    let infeasible = maxent_state(&MaxEntProblem::new(2, vec![linalg::sigma_z()], vec![2.0]).unwrap());
    ensure(matches!(infeasible, Err(BornError::Infeasible { .. })), || format!("v=2 gave {infeasible:?}"))?;

    let mut r = rng(7);
    let paulis = [linalg::sigma_x(), linalg::sigma_y(), linalg::sigma_z()];
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let rho0 = random::density(&mut r, 2);
        let targets = paulis.iter().map(|p| linalg::trace_product(rho0.matrix(), p).re).collect();
        let sol = maxent_state(&MaxEntProblem::new(2, paulis.to_vec(), targets).unwrap())
            .map_err(|e| e.to_string())?;
        worst = worst.max(linalg::max_abs_entry(&(sol.state.matrix() - rho0.matrix())));
    }
    ensure(worst <= 1e-7, || format!("Pauli constraints recover rho0 to {worst:.2e}"))?;

    // feasible perturbations along sx, sy keep <sz> and cannot raise the entropy
    let best = sol.entropy;
    for _ in 0..200 {
        let (a, b) = (r.random_range(-0.4..0.4), r.random_range(-0.4..0.4));
        let m = &target + linalg::sigma_x() * c(a, 0.0) + linalg::sigma_y() * c(b, 0.0);
        if let Ok(rho) = DensityOperator::new(m) {
            let s = rho.entropy().map_err(|e| e.to_string())?;
            ensure(s <= best + 1e-6, || format!("perturbed entropy {s} exceeds {best}"))?;
        }
    }
    Ok(format!("closed form {closed:.1e}; I/d exact; Infeasible raised; Pauli recovery {worst:.1e}; entropy maximal"))
}

fn projector_onto(vectors: &[bornkit::ComplexVector], d: usize) -> ComplexMatrix {
    vectors.iter().fold(ComplexMatrix::zeros(d, d), |acc, v| acc + linalg::outer(v))
}

fn scattering() -> Check {
    let mut r = rng(8);
    let (mut sum_dev, mut basis_dev) = (0.0f64, 0.0f64);
    for _ in 0..200 {
        let d = r.random_range(2..=6);
        let s = SMatrix::unlabeled(random::unitary(&mut r, d)).map_err(|e| e.to_string())?;
        let psi = random::state_vector(&mut r, d);
        let basis = random::orthonormal_basis(&mut r, d);
        let dist = transition_distribution(&s, &psi, &basis).map_err(|e| e.to_string())?;
        sum_dev = sum_dev.max((dist.iter().sum::<f64>() - 1.0).abs());

        // channel spanned by the first m basis vectors, re-expressed in a rotated basis
        let m = r.random_range(1..=d);
        let channel = &basis[..m];
        let mix = random::unitary(&mut r, m);
        let rotated: Vec<_> = (0..m)
            .map(|j| channel.iter().enumerate().fold(bornkit::ComplexVector::zeros(d), |acc, (i, v)| acc + v * mix[(i, j)]))
            .collect();
        let p1 = channel_sum_probability(&s, &psi, channel).map_err(|e| e.to_string())?;
        let p2 = channel_sum_probability(&s, &psi, &rotated).map_err(|e| e.to_string())?;
        let p3 = degenerate_channel_probability(&s, &psi, &projector_onto(channel, d)).map_err(|e| e.to_string())?;
        basis_dev = basis_dev.max((p1 - p2).abs()).max((p1 - p3).abs());
    }
    ensure(sum_dev <= 1e-10, || format!("distribution sums off by {sum_dev:.2e}"))?;
    ensure(basis_dev <= 1e-10, || format!("channel basis dependence {basis_dev:.2e}"))?;

    let h = std::f64::consts::FRAC_1_SQRT_2;
    let hadamard = SMatrix::unlabeled(linalg::real_matrix(2, 2, &[h, h, h, -h])).unwrap();
    let e0 = StateVector::from_real(&[1.0, 0.0]);
    let t = transition_probability(&hadamard, &e0, &e0).map_err(|e| e.to_string())?;
    ensure((t.probability - 0.5).abs() < 1e-15 && !t.nonunitary, || format!("Hadamard gave {t:?}"))?;

    let bytes = std::fs::read(fixture("fixtures/experiment.json")).unwrap();
    let hbar = serde_json::from_slice::<serde_json::Value>(&bytes).unwrap()["constants"]["hbar"].as_f64().unwrap();
    let report = run_bytes(&bytes, &RunOptions::default()).map_err(|e| e.to_string())?;
    let sg = report.results.iter().find(|r| r.id == "stern-gerlach").ok_or("no stern-gerlach task")?;
    let ev: Vec<[f64; 2]> = serde_json::from_value(sg.result.clone().ok_or("stern-gerlach errored")?["eigenvalues"].clone())
        .map_err(|e| e.to_string())?;
    let expected = [hbar / 2.0, -hbar / 2.0];
    ensure(
        ev.len() == 2 && ev.iter().zip(expected).all(|(z, e)| (z[0] - e).abs() <= 1e-12 * hbar && z[1] == 0.0),
        || format!("Stern-Gerlach eigenvalues {ev:?}, expected ±{}", hbar / 2.0),
    )?;
    Ok(format!("200 unitaries; sums {sum_dev:.1e}, basis independence {basis_dev:.1e}; Hadamard 1/2; SG ±hbar/2"))
}

fn uncertainty() -> Check {
    let mut r = rng(9);
    let mut min_slack = f64::INFINITY;
    for _ in 0..1000 {
        let d = r.random_range(2..=6);
        let rank = r.random_range(1..=d);
        let rho = random::density_with_rank(&mut r, d, rank);
        let a = random::hermitian(&mut r, d);
        let b = random::hermitian(&mut r, d);
        let rep = uncertainty_product_report(&rho, &a, &b).map_err(|e| e.to_string())?;
        ensure(rep.holds(1e-10), || format!("violated: {rep:?}"))?;
        min_slack = min_slack.min(rep.product() - rep.commutator_bound);
    }
    Ok(format!("1000 triples; min sigma_A sigma_B - |<[A,B]>|/2 = {min_slack:.1e}"))
}

fn without_wall_time(report: &Report) -> String {
    let mut r = report.clone();
    r.wall_time_ms = 0;
    r.to_json()
}

fn cli_determinism() -> Check {
    let bytes = std::fs::read(fixture("fixtures/experiment.json")).unwrap();
    let options = RunOptions::default();
    let first = run_bytes(&bytes, &options).map_err(|e| e.to_string())?;
    let second = run_bytes(&bytes, &options).map_err(|e| e.to_string())?;
    ensure(first.results.iter().all(|r| r.status == Status::Ok), || "golden config has failing tasks".into())?;
    let (a, b) = (without_wall_time(&first), without_wall_time(&second));
    ensure(a == b, || "two runs differ".into())?;
    let golden = fixture("golden/experiment_report.json");
    if std::env::var_os("BORNKIT_UPDATE_GOLDEN").is_some() {
        std::fs::write(&golden, &a).map_err(|e| e.to_string())?;
    }
    let stored = std::fs::read_to_string(&golden).map_err(|e| format!("{}: {e}", golden.display()))?;
    ensure(stored == a, || "report differs from the golden file".into())?;
    Ok(format!("{} tasks, two runs and golden file byte-identical", first.results.len()))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("measure validity and DRP", measure_validity, 10),
        ("BR-POVM sampling", born_povm_sampling, 5),
        ("BR-C sample means", born_c_sampling, 10),
        ("spectral round-trip", spectral_round_trip, 10),
        ("Naimark dilation", naimark, 10),
        ("tomography", tomography, 60),
        ("maximum entropy", maxent, 5),
        ("scattering", scattering, 5),
        ("uncertainty relation", uncertainty, 5),
        ("CLI determinism", cli_determinism, 5),
    ];
    let mut failures = 0;
    for (i, (name, check, limit)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = check();
        let elapsed = start.elapsed();
        let outcome = outcome.and_then(|detail| {
            if elapsed <= Duration::from_secs(*limit) {
                Ok(detail)
            } else {
                Err(format!("{detail}; runtime {:.2}s exceeds {limit}s", elapsed.as_secs_f64()))
            }
        });
        let (tag, detail) = match outcome {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failures += 1;
                ("FAIL", d)
            }
        };
        println!("criterion {:>2} {tag} [{:.2}s] {name}: {detail}", i + 1, elapsed.as_secs_f64());
    }
    if failures > 0 {
        println!("{failures} criterion(s) failed");
        std::process::exit(1);
    }
    println!("all 10 criteria passed");
}

