use bornkit::dilation::{dilated_rates, naimark_dilate};
use bornkit::linalg::{self, c, ComplexMatrix, ComplexVector};
use bornkit::measures::{
    is_projective, measured_quantity, quantity_expectation, response_rates, statistical_expectation, Detector,
    QuantumMeasure, Scale,
};
use bornkit::operators::{pure_state, quantum_value, uncertainty, DensityOperator, StateVector};
use bornkit::sampling::{sample_events, stream, verify_born_povm};
use bornkit::scattering::{channel_sum_probability, degenerate_channel_probability, transition_probability, SMatrix};
use bornkit::spectral::{born_probabilities_pure, spectral_measure, DEFAULT_CLUSTER_TOL};
use bornkit::{random, tomography};
use proptest::prelude::*;

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn quantum_value_is_linear(seed in any::<u64>(), d in 2usize..6, alpha in 0.0f64..3.0, beta in 0.0f64..3.0) {
        let mut rng = stream(seed, 0);
        let r1 = random::density(&mut rng, d);
        let r2 = random::density_with_rank(&mut rng, d, 1);
        let x = random::ginibre(&mut rng, d, d);
        let mix = DensityOperator::combine(alpha, &r1, beta, &r2).unwrap();
        let lhs = quantum_value(&mix, &x).unwrap();
        let rhs = quantum_value(&r1, &x).unwrap() * alpha + quantum_value(&r2, &x).unwrap() * beta;
        prop_assert!((lhs - rhs).norm() <= 1e-12 * lhs.norm().max(1.0));
        prop_assert!(rel_close(quantum_value(&mix, &linalg::identity(d)).unwrap().re, mix.intensity(), 1e-12));
        let h = random::hermitian(&mut rng, d);
        prop_assert!(quantum_value(&mix, &h).unwrap().im.abs() <= 1e-12);
    }

    #[test]
    fn eigenstates_have_zero_uncertainty(seed in any::<u64>(), d in 2usize..6) {
        let mut rng = stream(seed, 1);
        let x = random::hermitian(&mut rng, d);
        let (_, vecs) = linalg::hermitian_eigen(&x).unwrap();
        for k in 0..d {
            let rho = pure_state(&StateVector::new(vecs.column(k).into_owned()));
            prop_assert!(uncertainty(&rho, &x).unwrap() <= 1e-6);
        }
    }

    #[test]
    fn rates_sum_to_intensity(seed in any::<u64>(), d in 2usize..6, k in 1usize..6, scale in 0.0f64..5.0) {
        let mut rng = stream(seed, 2);
        let m = random::measure(&mut rng, d, k).unwrap();
        let rho = random::density(&mut rng, d).scaled(scale);
        let p = response_rates(&m, &rho).unwrap();
        prop_assert!(p.iter().all(|&x| x >= 0.0));
        prop_assert!(rel_close(p.iter().sum(), rho.intensity(), 1e-10));
    }

    #[test]
    fn every_element_fires_for_some_state(seed in any::<u64>(), d in 2usize..5, k in 1usize..5) {
        let mut rng = stream(seed, 3);
        let m = random::measure(&mut rng, d, k).unwrap();
        for (idx, p) in m.elements().iter().enumerate() {
            let rho = DensityOperator::new(p.clone()).unwrap();
            prop_assert!(response_rates(&m, &rho).unwrap()[idx] > 0.0);
        }
    }

    #[test]
    fn statistical_expectation_matches_quantum_expectation(seed in any::<u64>(), d in 2usize..5, k in 1usize..5) {
        let mut rng = stream(seed, 4);
        let m = random::measure(&mut rng, d, k).unwrap();
        let values: Vec<Vec<_>> = (0..k)
            .map(|_| {
                let v = random::ginibre(&mut rng, 2, 1);
                vec![v[0], v[1]]
            })
            .collect();
        let det = Detector::new(m, Scale::new(values, "").unwrap()).unwrap();
        let rho = random::density(&mut rng, d).scaled(2.5);
        let stat = statistical_expectation(&det, &rho, |x| x.to_vec()).unwrap();
        let quantum = quantity_expectation(&det, &rho).unwrap();
        for (a, b) in stat.iter().zip(&quantum) {
            prop_assert!((a - b).norm() <= 1e-10);
        }
    }

    #[test]
    fn orthonormal_basis_measures_are_projective(seed in any::<u64>(), d in 2usize..7) {
        let mut rng = stream(seed, 5);
        let basis = random::orthonormal_basis(&mut rng, d);
        let m = QuantumMeasure::from_orthonormal_basis(&basis).unwrap();
        prop_assert!(is_projective(&m, 1e-10));
    }

    #[test]
    fn spectral_projectors_are_eigenprojectors(seed in any::<u64>(), d in 2usize..8) {
        let mut rng = stream(seed, 6);
        let x = random::hermitian(&mut rng, d);
        let dec = spectral_measure(&x, DEFAULT_CLUSTER_TOL).unwrap();
        prop_assert!(is_projective(&dec.projectors, 1e-8));
        for (lambda, p) in dec.eigenvalues.iter().zip(dec.projectors.elements()) {
            prop_assert!(linalg::max_abs_entry(&(&x * p - p * *lambda)) <= 1e-8);
        }
        let det = Detector::new(dec.projectors.clone(), Scale::complex(&dec.eigenvalues)).unwrap();
        prop_assert!(linalg::frobenius(&(&measured_quantity(&det)[0] - &x)) <= 1e-9);
    }

    #[test]
    fn nondegenerate_squared_amplitudes_match_projector_rates(seed in any::<u64>(), d in 2usize..6) {
        let mut rng = stream(seed, 7);
        let x = random::hermitian(&mut rng, d);
        let psi = random::state_vector(&mut rng, d);
        let (_, vecs) = linalg::hermitian_eigen(&x).unwrap();
        let basis: Vec<ComplexVector> = (0..d).map(|k| vecs.column(k).into_owned()).collect();
        let amplitudes = born_probabilities_pure(&psi, &basis).unwrap();
        prop_assert!((amplitudes.iter().sum::<f64>() - 1.0).abs() <= 1e-10);
        let dec = spectral_measure(&x, DEFAULT_CLUSTER_TOL).unwrap();
        let rates = response_rates(&dec.projectors, &pure_state(&psi)).unwrap();
        // eigenvectors come ascending, clusters descending
        for (k, r) in rates.iter().enumerate() {
            prop_assert!((r - amplitudes[d - 1 - k]).abs() <= 1e-10);
        }
    }

    #[test]
    fn dilation_preserves_rates(seed in any::<u64>(), d in 2usize..5, k in 1usize..6) {
        let mut rng = stream(seed, 8);
        let m = random::measure(&mut rng, d, k).unwrap();
        let dil = naimark_dilate(&m).unwrap();
        prop_assert!(dil.isometry_deviation() <= 1e-10);
        prop_assert!(is_projective(&dil.projective_measure, 1e-10));
        prop_assert!(dil.reconstruction_deviation(&m) <= 1e-9);
        let rho = random::density(&mut rng, d);
        for (a, b) in dilated_rates(&dil, &rho).unwrap().iter().zip(response_rates(&m, &rho).unwrap()) {
            prop_assert!((a - b).abs() <= 1e-9);
        }
    }

    #[test]
    fn transition_probability_is_symmetric_under_adjoint(seed in any::<u64>(), d in 2usize..8) {
        let mut rng = stream(seed, 9);
        let s = SMatrix::unlabeled(random::unitary(&mut rng, d)).unwrap();
        let a = random::state_vector(&mut rng, d);
        let b = random::state_vector(&mut rng, d);
        let forward = transition_probability(&s, &a, &b).unwrap().probability;
        let backward = transition_probability(&s.adjoint(), &b, &a).unwrap().probability;
        prop_assert!((forward - backward).abs() <= 1e-12);
        prop_assert!(forward <= 1.0 + 1e-12);
    }

    #[test]
    fn degenerate_channels_are_basis_independent(seed in any::<u64>(), d in 3usize..8, r in 1usize..3) {
        let mut rng = stream(seed, 10);
        let s = SMatrix::unlabeled(random::unitary(&mut rng, d)).unwrap();
        let psi = random::state_vector(&mut rng, d);
        let frame = random::unitary(&mut rng, d);
        let basis_a: Vec<ComplexVector> = (0..r).map(|j| frame.column(j).into_owned()).collect();
        // rotate within the subspace by a random r×r unitary
        let w = random::unitary(&mut rng, r);
        let sub = frame.columns(0, r).into_owned() * &w;
        let basis_b: Vec<ComplexVector> = (0..r).map(|j| sub.column(j).into_owned()).collect();
        let pa = channel_sum_probability(&s, &psi, &basis_a).unwrap();
        let pb = channel_sum_probability(&s, &psi, &basis_b).unwrap();
        let projector: ComplexMatrix = basis_a.iter().map(linalg::outer).sum();
        let pp = degenerate_channel_probability(&s, &psi, &projector).unwrap();
        prop_assert!((pa - pb).abs() <= 1e-10 && (pa - pp).abs() <= 1e-10);
    }

    #[test]
    fn serialized_objects_round_trip(seed in any::<u64>(), d in 2usize..4, k in 1usize..4) {
        let mut rng = stream(seed, 11);
        let m = random::measure(&mut rng, d, k).unwrap();
        let rho = random::density(&mut rng, d);
        let first = serde_json::to_string(&(m, rho)).unwrap();
        let back: (QuantumMeasure, DensityOperator) = serde_json::from_str(&first).unwrap();
        prop_assert_eq!(serde_json::to_string(&back).unwrap(), first);
    }
}

#[test]
fn scattering_matches_squared_amplitude_form() {
    let mut rng = stream(12, 0);
    for d in 2..6 {
        let s = SMatrix::unlabeled(random::unitary(&mut rng, d)).unwrap();
        let psi_in = random::state_vector(&mut rng, d);
        let basis = random::orthonormal_basis(&mut rng, d);
        let evolved = StateVector::new(s.matrix() * psi_in.amplitudes());
        let squared = born_probabilities_pure(&evolved, &basis).unwrap();
        for (phi, p) in basis.iter().zip(&squared) {
            let t = transition_probability(&s, &psi_in, &StateVector::new(phi.clone())).unwrap();
            assert!((t.probability - p).abs() <= 1e-12);
        }
    }
}

#[test]
fn sampling_is_deterministic_and_converges() {
    let det = Detector::new(QuantumMeasure::trine(), Scale::real(&[1.0, 2.0, 3.0])).unwrap();
    let rho = DensityOperator::maximally_mixed(2);
    assert_eq!(sample_events(&det, &rho, 50_000, 8).unwrap(), sample_events(&det, &rho, 50_000, 8).unwrap());
    for (i, n) in [1_000u64, 10_000, 100_000].into_iter().enumerate() {
        assert!(verify_born_povm(&det, &rho, n, 100 + i as u64, 5.0).unwrap().pass);
    }
}

#[test]
fn projective_samples_land_on_the_spectrum() {
    let x = linalg::real_matrix(3, 3, &[2.0, 1.0, 0.0, 1.0, 2.0, 0.0, 0.0, 0.0, -1.0]);
    let dec = spectral_measure(&x, DEFAULT_CLUSTER_TOL).unwrap();
    let det = Detector::new(dec.projectors.clone(), Scale::complex(&dec.eigenvalues)).unwrap();
    let mut rng = stream(13, 0);
    let rho = random::density(&mut rng, 3);
    let log = sample_events(&det, &rho, 20_000, 13).unwrap();
    let spectrum = linalg::hermitian_eigen(&x).unwrap().0;
    for (count, value) in log.counts.iter().zip(det.scale().values()) {
        if *count > 0 {
            assert!(spectrum.iter().any(|s| (value[0] - c(*s, 0.0)).norm() < 1e-10));
        }
    }
}

#[test]
fn tomography_recovers_random_measures() {
    let mut rng = stream(14, 0);
    for trial in 0..20 {
        let d = 2 + trial % 2;
        let k = 1 + trial % 4;
        let m = random::measure(&mut rng, d, k).unwrap();
        let states: Vec<DensityOperator> = (0..d * d + 2).map(|_| random::density(&mut rng, d)).collect();
        let cal = tomography::CalibrationSet::from_measure(states, &m).unwrap();
        let rec = tomography::reconstruct_measure(&cal).unwrap();
        for (a, b) in rec.measure.elements().iter().zip(m.elements()) {
            assert!(linalg::frobenius(&(a - b)) <= 1e-7);
        }
    }
}
