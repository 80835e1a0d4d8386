//! Small dense complex linear-algebra helpers shared by every module.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{BornError, Result};

/// Dense complex matrix, stored by nalgebra in column-major order.
pub type ComplexMatrix = DMatrix<Complex64>;
/// Dense complex column vector.
pub type ComplexVector = DVector<Complex64>;

#[inline]
pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn identity(dim: usize) -> ComplexMatrix {
    ComplexMatrix::identity(dim, dim)
}

/// Builds a matrix from row-major entries.
pub fn from_rows(rows: usize, cols: usize, entries: &[Complex64]) -> ComplexMatrix {
    ComplexMatrix::from_row_slice(rows, cols, entries)
}

/// Builds a matrix from real row-major entries.
pub fn real_matrix(rows: usize, cols: usize, entries: &[f64]) -> ComplexMatrix {
    ComplexMatrix::from_iterator(
        rows,
        cols,
        (0..rows * cols).map(|i| {
            let (r, col) = (i % rows, i / rows);
            c(entries[r * cols + col], 0.0)
        }),
    )
}

pub fn diag_real(values: &[f64]) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(values.len(), values.len());
    for (i, v) in values.iter().enumerate() {
        m[(i, i)] = c(*v, 0.0);
    }
    m
}

pub fn vector(entries: &[Complex64]) -> ComplexVector {
    ComplexVector::from_column_slice(entries)
}

pub fn real_vector(entries: &[f64]) -> ComplexVector {
    ComplexVector::from_iterator(entries.len(), entries.iter().map(|&x| c(x, 0.0)))
}

/// `ψψ*`
pub fn outer(psi: &ComplexVector) -> ComplexMatrix {
    psi * psi.adjoint()
}

pub fn sigma_x() -> ComplexMatrix {
    real_matrix(2, 2, &[0.0, 1.0, 1.0, 0.0])
}

pub fn sigma_y() -> ComplexMatrix {
    from_rows(2, 2, &[c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)])
}

pub fn sigma_z() -> ComplexMatrix {
    real_matrix(2, 2, &[1.0, 0.0, 0.0, -1.0])
}

pub fn ensure_square(m: &ComplexMatrix) -> Result<usize> {
    if m.nrows() != m.ncols() || m.nrows() == 0 {
        return Err(BornError::NotSquare { rows: m.nrows(), cols: m.ncols() });
    }
    Ok(m.nrows())
}

pub fn ensure_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(BornError::DimensionMismatch { expected, found });
    }
    Ok(())
}

/// Largest entrywise modulus of `A - A*`.
pub fn hermitian_deviation(m: &ComplexMatrix) -> f64 {
    let n = m.nrows();
    let mut dev = 0.0f64;
    for i in 0..n {
        for j in i..n {
            dev = dev.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    dev
}

/// `(A + A*) / 2`
pub fn hermitian_part(m: &ComplexMatrix) -> ComplexMatrix {
    (m + m.adjoint()) * c(0.5, 0.0)
}

pub fn max_abs_entry(m: &ComplexMatrix) -> f64 {
    m.iter().fold(0.0f64, |acc, z| acc.max(z.norm()))
}

pub fn frobenius(m: &ComplexMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// `tr(AB)` without forming the product.
pub fn trace_product(a: &ComplexMatrix, b: &ComplexMatrix) -> Complex64 {
    let n = a.nrows();
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..n {
        for j in 0..a.ncols() {
            acc += a[(i, j)] * b[(j, i)];
        }
    }
    acc
}

pub fn trace(m: &ComplexMatrix) -> Complex64 {
    m.diagonal().iter().sum()
}

/// Eigendecomposition of a Hermitian matrix. Eigenvalues ascending, eigenvectors in the
/// matching columns. Only the Hermitian part of the input is used.
pub fn hermitian_eigen(m: &ComplexMatrix) -> Result<(Vec<f64>, ComplexMatrix)> {
    let h = hermitian_part(m);
    let n = h.nrows();
    let eig = nalgebra::SymmetricEigen::try_new(h, f64::EPSILON, 0).ok_or(BornError::EigenFailure)?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = ComplexMatrix::from_columns(
        &order.iter().map(|&i| eig.eigenvectors.column(i).into_owned()).collect::<Vec<_>>(),
    );
    Ok((values, vectors))
}

/// Smallest eigenvalue of the Hermitian part.
pub fn min_eigenvalue(m: &ComplexMatrix) -> Result<f64> {
    let (values, _) = hermitian_eigen(m)?;
    Ok(values.first().copied().unwrap_or(0.0))
}

/// Rebuilds `Σ f(λ_i) v_i v_i*` from a Hermitian eigendecomposition.
pub fn hermitian_function(m: &ComplexMatrix, f: impl Fn(f64) -> f64) -> Result<ComplexMatrix> {
    let (values, vectors) = hermitian_eigen(m)?;
    let n = m.nrows();
    let mut out = ComplexMatrix::zeros(n, n);
    for (i, &lambda) in values.iter().enumerate() {
        let weight = f(lambda);
        if weight == 0.0 {
            continue;
        }
        let v = vectors.column(i);
        out += (v * v.adjoint()) * c(weight, 0.0);
    }
    Ok(out)
}

/// Hermitian square root of a positive semidefinite matrix; eigenvalues in `[-tol, 0)` clamp to zero.
pub fn psd_sqrt(m: &ComplexMatrix, tol: f64) -> Result<ComplexMatrix> {
    let (values, _) = hermitian_eigen(m)?;
    if let Some(&min) = values.first() {
        if min < -tol {
            return Err(BornError::NotPsd { min_eigenvalue: min });
        }
    }
    hermitian_function(m, |x| x.max(0.0).sqrt())
}

/// Orthogonal projection of a Hermitian matrix onto the PSD cone.
pub fn psd_projection(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    hermitian_function(m, |x| x.max(0.0))
}

/// Largest entrywise deviation of the Gram matrix of `vectors` from the identity.
pub fn gram_deviation(vectors: &[ComplexVector]) -> f64 {
    let mut dev = 0.0f64;
    for (i, a) in vectors.iter().enumerate() {
        for (j, b) in vectors.iter().enumerate().skip(i) {
            let ip = a.dotc(b);
            let target = if i == j { 1.0 } else { 0.0 };
            dev = dev.max((ip - c(target, 0.0)).norm());
        }
    }
    dev
}

/// Orthonormal coordinates of a Hermitian matrix in the `d²`-dimensional real space of
/// Hermitian matrices with the Hilbert–Schmidt inner product: diagonal entries, then
/// `√2·Re A_ij` and `√2·Im A_ij` for `i < j`. For Hermitian `A, B`,
/// `tr(AB) = coords(A) · coords(B)`.
pub fn hermitian_coords(m: &ComplexMatrix) -> DVector<f64> {
    let d = m.nrows();
    let mut out = Vec::with_capacity(d * d);
    for i in 0..d {
        out.push(m[(i, i)].re);
    }
    let s = std::f64::consts::SQRT_2;
    for i in 0..d {
        for j in (i + 1)..d {
            // average the two triangles so slightly non-Hermitian input maps to its Hermitian part
            let z = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
            out.push(s * z.re);
            out.push(s * z.im);
        }
    }
    DVector::from_vec(out)
}

/// Inverse of [`hermitian_coords`].
pub fn from_hermitian_coords(coords: &DVector<f64>, d: usize) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(d, d);
    for i in 0..d {
        m[(i, i)] = c(coords[i], 0.0);
    }
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut idx = d;
    for i in 0..d {
        for j in (i + 1)..d {
            let z = c(coords[idx] * s, coords[idx + 1] * s);
            m[(i, j)] = z;
            m[(j, i)] = z.conj();
            idx += 2;
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigen_sorted_ascending() {
        let (vals, vecs) = hermitian_eigen(&sigma_x()).unwrap();
        assert!((vals[0] + 1.0).abs() < 1e-14 && (vals[1] - 1.0).abs() < 1e-14);
        let recon = &vecs * diag_real(&vals) * vecs.adjoint();
        assert!(frobenius(&(recon - sigma_x())) < 1e-14);
    }

    #[test]
    fn coords_reproduce_trace_product() {
        let a = from_rows(2, 2, &[c(0.3, 0.0), c(0.1, -0.2), c(0.1, 0.2), c(0.7, 0.0)]);
        let b = sigma_y() + sigma_z() * c(0.5, 0.0);
        let lhs = trace_product(&a, &b).re;
        let rhs = hermitian_coords(&a).dot(&hermitian_coords(&b));
        assert!((lhs - rhs).abs() < 1e-15);
        assert!(frobenius(&(from_hermitian_coords(&hermitian_coords(&a), 2) - &a)) < 1e-15);
    }

    #[test]
    fn sqrt_of_projector_is_itself() {
        let p = diag_real(&[1.0, 0.0]);
        assert!(frobenius(&(psd_sqrt(&p, 1e-10).unwrap() - &p)) < 1e-15);
        assert!(matches!(psd_sqrt(&diag_real(&[1.0, -0.5]), 1e-10), Err(BornError::NotPsd { .. })));
    }

    #[test]
    fn real_matrix_is_row_major() {
        let m = real_matrix(2, 3, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        assert_eq!(m[(0, 2)], c(3.0, 0.0));
        assert_eq!(m[(1, 0)], c(4.0, 0.0));
    }
}
