//! Seeded random states, Hermitian operators, quantum measures and unitaries for
//! property checks.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::Result;
use crate::linalg::{self, c, ComplexMatrix, ComplexVector};
use crate::measures::QuantumMeasure;
use crate::operators::{DensityOperator, StateVector};

/// `rows × cols` matrix with i.i.d. standard complex Gaussian entries.
pub fn ginibre<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        c(re, im) * std::f64::consts::FRAC_1_SQRT_2
    })
}

pub fn state_vector<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> StateVector {
    let v: ComplexVector = ginibre(rng, dim, 1).column(0).into_owned();
    StateVector::new(&v / c(v.norm(), 0.0))
}

/// Random density operator of intensity one and rank `min(rank, dim)`.
pub fn density_with_rank<R: Rng + ?Sized>(rng: &mut R, dim: usize, rank: usize) -> DensityOperator {
    let g = ginibre(rng, dim, rank.clamp(1, dim));
    let m = &g * g.adjoint();
    let m = linalg::hermitian_part(&m);
    let tr = linalg::trace(&m).re;
    DensityOperator::new(m / c(tr, 0.0)).expect("G G* is a density operator")
}

/// Random full-rank density operator of intensity one.
pub fn density<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> DensityOperator {
    density_with_rank(rng, dim, dim)
}

pub fn hermitian<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> ComplexMatrix {
    linalg::hermitian_part(&ginibre(rng, dim, dim))
}

/// Random `k`-element quantum measure: `P_k = S^{-1/2} A_k S^{-1/2}` with `A_k = G_k G_k*`
/// and `S = Σ_k A_k`.
pub fn measure<R: Rng + ?Sized>(rng: &mut R, dim: usize, k: usize) -> Result<QuantumMeasure> {
    let parts: Vec<ComplexMatrix> = (0..k)
        .map(|_| {
            let g = ginibre(rng, dim, dim);
            linalg::hermitian_part(&(&g * g.adjoint()))
        })
        .collect();
    let total: ComplexMatrix = parts.iter().sum();
    let inv_sqrt = linalg::hermitian_function(&total, |x| 1.0 / x.sqrt())?;
    let mut elements: Vec<ComplexMatrix> =
        parts.iter().map(|a| linalg::hermitian_part(&(&inv_sqrt * a * &inv_sqrt))).collect();
    // absorb the rounding of Σ P_k − I into the last element
    let sum: ComplexMatrix = elements.iter().sum();
    let last = elements.len() - 1;
    elements[last] -= sum - linalg::identity(dim);
    QuantumMeasure::unlabeled(elements)
}

/// Haar-random unitary from the QR decomposition of a Ginibre matrix, with the phases
/// of `R`'s diagonal moved into `Q`.
pub fn unitary<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> ComplexMatrix {
    let qr = ginibre(rng, dim, dim).qr();
    let (mut q, r) = qr.unpack();
    for j in 0..dim {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { c(1.0, 0.0) };
        let mut col = q.column_mut(j);
        col *= phase;
    }
    q
}

/// Random orthonormal basis of `C^dim` (columns of a random unitary).
pub fn orthonormal_basis<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Vec<ComplexVector> {
    let u = unitary(rng, dim);
    (0..dim).map(|j| u.column(j).into_owned()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::stream;

    #[test]
    fn generated_objects_are_valid() {
        let mut rng = stream(5, 0);
        for d in 2..6 {
            let rho = density(&mut rng, d);
            assert!((rho.intensity() - 1.0).abs() < 1e-12);
            let m = measure(&mut rng, d, 4).unwrap();
            assert_eq!(m.len(), 4);
            let u = unitary(&mut rng, d);
            let dev = linalg::frobenius(&(u.adjoint() * &u - linalg::identity(d)));
            assert!(dev < 1e-12);
        }
    }

    #[test]
    fn low_rank_density() {
        let mut rng = stream(1, 0);
        let rho = density_with_rank(&mut rng, 4, 1);
        let ev = rho.eigenvalues().unwrap();
        assert!(ev[..3].iter().all(|x| x.abs() < 1e-12));
    }
}
