//! Projective measures from spectral decompositions, squared-amplitude probabilities and
//! the function calculus `f(X*, X) = Σ_k f(x̄_k, x_k) P_k`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{BornError, Result};
use crate::linalg::{self, c, ComplexMatrix, ComplexVector};
use crate::measures::{response_probabilities, QuantumMeasure};
use crate::operators::{DensityOperator, StateVector};
use crate::wire;
use crate::HERMITIAN_TOL;

pub const DEFAULT_CLUSTER_TOL: f64 = 1e-8;
/// Frobenius bound on `XX* − X*X` for a matrix to count as normal.
pub const NORMALITY_TOL: f64 = 1e-8;
const UNIT_NORM_TOL: f64 = 1e-10;

/// Distinct eigenvalues `λ_k` of a normal operator with the orthogonal projectors onto
/// their eigenspaces. Eigenvalues are ordered by decreasing real part, then decreasing
/// imaginary part.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralDecomposition {
    #[serde(with = "wire::complex_vec")]
    pub eigenvalues: Vec<Complex64>,
    pub projectors: QuantumMeasure,
    pub cluster_tol: f64,
}

impl SpectralDecomposition {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// `Σ_k λ_k P_k`
    pub fn reconstruct(&self) -> ComplexMatrix {
        function_calculus(self, |_, x| x)
    }

    /// Dimension of each eigenspace.
    pub fn multiplicities(&self) -> Vec<usize> {
        self.projectors.elements().iter().map(|p| linalg::trace(p).re.round() as usize).collect()
    }
}

/// Frobenius norm of `XX* − X*X`.
pub fn normality_deviation(x: &ComplexMatrix) -> f64 {
    let xa = x.adjoint();
    linalg::frobenius(&(x * &xa - &xa * x))
}

/// Spectral measure of a normal matrix. Eigenvalues closer than `cluster_tol` (chained)
/// share one eigenspace. Hermitian input takes the Hermitian eigensolver; other normal
/// matrices go through a complex Schur decomposition.
pub fn spectral_measure(x: &ComplexMatrix, cluster_tol: f64) -> Result<SpectralDecomposition> {
    let dim = linalg::ensure_square(x)?;
    let (values, vectors): (Vec<Complex64>, ComplexMatrix) = if linalg::hermitian_deviation(x) <= HERMITIAN_TOL {
        let (vals, vecs) = linalg::hermitian_eigen(x)?;
        (vals.into_iter().map(|v| c(v, 0.0)).collect(), vecs)
    } else {
        let deviation = normality_deviation(x);
        if deviation > NORMALITY_TOL {
            return Err(BornError::NotNormal { deviation });
        }
        let schur = nalgebra::Schur::try_new(x.clone(), f64::EPSILON, 0).ok_or(BornError::EigenFailure)?;
        let (q, t) = schur.unpack();
        ((0..dim).map(|i| t[(i, i)]).collect(), q)
    };

    let clusters = cluster(&values, cluster_tol);
    let mut eigenvalues = Vec::with_capacity(clusters.len());
    let mut projectors = Vec::with_capacity(clusters.len());
    for members in &clusters {
        let mean = members.iter().map(|&i| values[i]).sum::<Complex64>() / members.len() as f64;
        let mut p = ComplexMatrix::zeros(dim, dim);
        for &i in members {
            let v = vectors.column(i);
            p += v * v.adjoint();
        }
        eigenvalues.push(mean);
        projectors.push(linalg::hermitian_part(&p));
    }
    let labels = (0..clusters.len()).map(|k| format!("lambda{k}")).collect();
    Ok(SpectralDecomposition {
        eigenvalues,
        projectors: QuantumMeasure::new(projectors, labels)?,
        cluster_tol,
    })
}

/// Groups indices of `values` whose pairwise chains stay within `tol`, ordered by
/// decreasing real part (then imaginary part) of the first member.
fn cluster(values: &[Complex64], tol: f64) -> Vec<Vec<usize>> {
    let n = values.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if (values[i] - values[j]).norm() <= tol {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                parent[a] = b;
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[b].re.total_cmp(&values[a].re).then(values[b].im.total_cmp(&values[a].im)));
    let mut groups: Vec<(usize, Vec<usize>)> = Vec::new();
    for i in order {
        let root = find(&mut parent, i);
        match groups.iter_mut().find(|(r, _)| *r == root) {
            Some((_, members)) => members.push(i),
            None => groups.push((root, vec![i])),
        }
    }
    groups.into_iter().map(|(_, m)| m).collect()
}

/// Squared amplitudes `|φ_k* ψ|²` of a unit vector against an orthonormal family.
pub fn born_probabilities_pure(psi: &StateVector, basis: &[ComplexVector]) -> Result<Vec<f64>> {
    let norm = psi.norm();
    if (norm - 1.0).abs() > UNIT_NORM_TOL {
        return Err(BornError::NotNormalized { norm });
    }
    for phi in basis {
        linalg::ensure_dim(psi.dim(), phi.len())?;
    }
    let deviation = linalg::gram_deviation(basis);
    if deviation > UNIT_NORM_TOL {
        return Err(BornError::NotOrthonormal { deviation });
    }
    Ok(basis.iter().map(|phi| phi.dotc(psi.amplitudes()).norm_sqr()).collect())
}

/// `Σ_k f(λ̄_k, λ_k) P_k`
pub fn function_calculus<F>(decomp: &SpectralDecomposition, f: F) -> ComplexMatrix
where
    F: Fn(Complex64, Complex64) -> Complex64,
{
    let dim = decomp.projectors.dim();
    decomp
        .eigenvalues
        .iter()
        .zip(decomp.projectors.elements())
        .fold(ComplexMatrix::zeros(dim, dim), |acc, (&x, p)| acc + p * f(x.conj(), x))
}

/// Unit vector spanning the range of a rank-one projector.
fn range_vector(p: &ComplexMatrix) -> ComplexVector {
    let (col, _) = (0..p.ncols())
        .map(|j| (j, p.column(j).norm()))
        .fold((0, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
    let v = p.column(col).into_owned();
    let n = v.norm();
    v / c(n, 0.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectiveComparison {
    #[serde(with = "wire::complex_vec")]
    pub eigenvalues: Vec<Complex64>,
    /// `tr ρ P_k / tr ρ` over the spectral projectors.
    pub povm_probabilities: Vec<f64>,
    /// `|φ_k* ψ|²` when `ρ` is pure and every eigenspace is one-dimensional.
    pub squared_amplitudes: Option<Vec<f64>>,
    pub max_deviation: f64,
}

/// Probabilities of the spectral measure of a Hermitian `X` computed as POVM rates and,
/// for pure states with nondegenerate spectrum, as squared amplitudes.
pub fn projective_rates_equal_povm_rates(x: &ComplexMatrix, rho: &DensityOperator) -> Result<ProjectiveComparison> {
    let deviation = linalg::hermitian_deviation(x);
    if deviation > HERMITIAN_TOL {
        return Err(BornError::NotHermitian { deviation });
    }
    let decomp = spectral_measure(x, DEFAULT_CLUSTER_TOL)?;
    let povm_probabilities = response_probabilities(&decomp.projectors, rho)?;

    let ev = rho.normalized()?.eigenvalues()?;
    let is_pure = ev[..ev.len() - 1].iter().all(|v| v.abs() <= 1e-10);
    let nondegenerate = decomp.multiplicities().iter().all(|&m| m == 1);
    let squared_amplitudes = if is_pure && nondegenerate {
        let normalized = rho.normalized()?;
        let (_, vecs) = linalg::hermitian_eigen(normalized.matrix())?;
        let psi = StateVector::new(vecs.column(vecs.ncols() - 1).into_owned());
        let basis: Vec<ComplexVector> = decomp.projectors.elements().iter().map(range_vector).collect();
        Some(born_probabilities_pure(&psi, &basis)?)
    } else {
        None
    };
    let max_deviation = squared_amplitudes
        .as_ref()
        .map(|sq| sq.iter().zip(&povm_probabilities).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
        .unwrap_or(0.0);
    Ok(ProjectiveComparison { eigenvalues: decomp.eigenvalues, povm_probabilities, squared_amplitudes, max_deviation })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{diag_real, sigma_x, sigma_z};
    use crate::measures::is_projective;
    use crate::operators::pure_state;

    fn close_c(a: Complex64, re: f64) -> bool {
        (a - c(re, 0.0)).norm() < 1e-12
    }

    #[test]
    fn sigma_z_decomposition() {
        let d = spectral_measure(&sigma_z(), DEFAULT_CLUSTER_TOL).unwrap();
        assert!(close_c(d.eigenvalues[0], 1.0) && close_c(d.eigenvalues[1], -1.0));
        assert!(linalg::frobenius(&(&d.projectors.elements()[0] - diag_real(&[1.0, 0.0]))) < 1e-12);
        assert!(linalg::frobenius(&(&d.projectors.elements()[1] - diag_real(&[0.0, 1.0]))) < 1e-12);
    }

    #[test]
    fn identity_is_one_cluster() {
        let d = spectral_measure(&linalg::identity(3), DEFAULT_CLUSTER_TOL).unwrap();
        assert_eq!(d.len(), 1);
        assert!(close_c(d.eigenvalues[0], 1.0));
        assert!(linalg::frobenius(&(&d.projectors.elements()[0] - linalg::identity(3))) < 1e-12);
    }

    #[test]
    fn sigma_x_projectors_are_plus_minus() {
        let d = spectral_measure(&sigma_x(), DEFAULT_CLUSTER_TOL).unwrap();
        let half = linalg::real_matrix(2, 2, &[0.5, 0.5, 0.5, 0.5]);
        let half_minus = linalg::real_matrix(2, 2, &[0.5, -0.5, -0.5, 0.5]);
        assert!(close_c(d.eigenvalues[0], 1.0));
        assert!(linalg::frobenius(&(&d.projectors.elements()[0] - half)) < 1e-12);
        assert!(linalg::frobenius(&(&d.projectors.elements()[1] - half_minus)) < 1e-12);
        assert!(is_projective(&d.projectors, 1e-12));
    }

    #[test]
    fn normal_non_hermitian_path() {
        // unitary with eigenvalues ±i
        let x = linalg::from_rows(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(-1.0, 0.0), c(0.0, 0.0)]);
        let d = spectral_measure(&x, DEFAULT_CLUSTER_TOL).unwrap();
        assert_eq!(d.len(), 2);
        assert!(linalg::frobenius(&(d.reconstruct() - &x)) < 1e-12);
        assert!(is_projective(&d.projectors, 1e-10));
    }

    #[test]
    fn defective_matrix_rejected() {
        let jordan = linalg::real_matrix(2, 2, &[1.0, 1.0, 0.0, 1.0]);
        assert!(matches!(spectral_measure(&jordan, DEFAULT_CLUSTER_TOL), Err(BornError::NotNormal { .. })));
    }

    #[test]
    fn squared_amplitude_examples() {
        let basis = [linalg::real_vector(&[1.0, 0.0]), linalg::real_vector(&[0.0, 1.0])];
        let p = born_probabilities_pure(&StateVector::from_real(&[1.0, 0.0]), &basis).unwrap();
        assert_eq!(p, vec![1.0, 0.0]);

        let t = std::f64::consts::PI / 6.0;
        let p = born_probabilities_pure(&StateVector::from_real(&[t.cos(), t.sin()]), &basis).unwrap();
        assert!((p[0] - 0.75).abs() < 1e-15 && (p[1] - 0.25).abs() < 1e-15);

        let s = std::f64::consts::FRAC_1_SQRT_2;
        let pm = [linalg::real_vector(&[s, s]), linalg::real_vector(&[s, -s])];
        let p = born_probabilities_pure(&StateVector::from_real(&[s, s]), &pm).unwrap();
        assert!((p[0] - 1.0).abs() < 1e-15 && p[1].abs() < 1e-15);

        assert!(matches!(
            born_probabilities_pure(&StateVector::from_real(&[1.0, 1.0]), &basis),
            Err(BornError::NotNormalized { .. })
        ));
        let skew = [linalg::real_vector(&[1.0, 0.0]), linalg::real_vector(&[s, s])];
        assert!(matches!(
            born_probabilities_pure(&StateVector::from_real(&[1.0, 0.0]), &skew),
            Err(BornError::NotOrthonormal { .. })
        ));
    }

    #[test]
    fn function_calculus_examples() {
        let d = spectral_measure(&sigma_z(), DEFAULT_CLUSTER_TOL).unwrap();
        assert!(linalg::frobenius(&(function_calculus(&d, |_, x| x) - sigma_z())) < 1e-12);
        assert!(linalg::frobenius(&(function_calculus(&d, |_, x| x * x) - linalg::identity(2))) < 1e-12);

        let x = linalg::from_rows(2, 2, &[c(0.0, 1.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, -1.0)]);
        let d = spectral_measure(&x, DEFAULT_CLUSTER_TOL).unwrap();
        assert!(linalg::frobenius(&(function_calculus(&d, |xb, x| xb * x) - linalg::identity(2))) < 1e-12);
    }

    #[test]
    fn projective_vs_povm_examples() {
        let ket0 = pure_state(&StateVector::from_real(&[1.0, 0.0]));
        let r = projective_rates_equal_povm_rates(&sigma_z(), &ket0).unwrap();
        assert_eq!(r.squared_amplitudes.as_ref().unwrap().len(), 2);
        assert!((r.povm_probabilities[0] - 1.0).abs() < 1e-12 && r.max_deviation < 1e-10);

        let r = projective_rates_equal_povm_rates(&sigma_x(), &ket0).unwrap();
        for p in r.povm_probabilities.iter().chain(r.squared_amplitudes.as_ref().unwrap()) {
            assert!((p - 0.5).abs() < 1e-12);
        }
        assert!(r.max_deviation < 1e-10);

        let r = projective_rates_equal_povm_rates(&diag_real(&[2.0, 2.0, 5.0]), &DensityOperator::maximally_mixed(3)).unwrap();
        assert!(r.squared_amplitudes.is_none());
        assert_eq!(r.eigenvalues.len(), 2);
        // eigenvalue 5 is listed first: its eigenspace carries 1/3, the 2-eigenspace 2/3
        assert!(close_c(r.eigenvalues[0], 5.0) && close_c(r.eigenvalues[1], 2.0));
        assert!((r.povm_probabilities[0] - 1.0 / 3.0).abs() < 1e-12);
        assert!((r.povm_probabilities[1] - 2.0 / 3.0).abs() < 1e-12);
    }
}
