//! Small dense complex helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub const ONE: C64 = C64 { re: 1.0, im: 0.0 };

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[inline]
pub fn r(re: f64) -> C64 {
    C64::new(re, 0.0)
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Eigenvalues (ascending) and eigenvectors of the Hermitian part of `m`.
pub fn hermitian_eigen(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let h = (m + m.adjoint()).scale(0.5);
    let eig = h.symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMatrix::from_fn(m.nrows(), order.len(), |row, col| {
        eig.eigenvectors[(row, order[col])]
    });
    (values, vectors)
}

pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    hermitian_eigen(m).0
}

/// Eigenvalues in `[-clip, 0)` are treated as zero.
pub fn clip_eigenvalue(value: f64, clip: f64) -> f64 {
    if value < 0.0 && value >= -clip {
        0.0
    } else {
        value
    }
}

/// Eigenvalues below this fraction of the largest one are rounding noise
/// when taking square roots; `sqrt(1e-16)` would otherwise leak `1e-8`.
pub const RANK_FLOOR: f64 = 1e-13;

/// Square roots of a PSD spectrum, with values under the rank floor set to zero.
pub fn spectrum_roots(values: &[f64]) -> Vec<f64> {
    let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    values.iter().map(|&v| if v <= RANK_FLOOR * scale { 0.0 } else { v.sqrt() }).collect()
}

/// Principal square root of a positive semidefinite Hermitian matrix.
/// Negative and rounding-level eigenvalues become zero.
pub fn psd_sqrt(m: &CMatrix) -> CMatrix {
    let (values, vectors) = hermitian_eigen(m);
    let roots = DVector::from_iterator(values.len(), spectrum_roots(&values).into_iter().map(r));
    &vectors * CMatrix::from_diagonal(&roots) * vectors.adjoint()
}

pub fn singular_values(m: &CMatrix) -> Vec<f64> {
    let mut values: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    values.sort_by(|a, b| b.total_cmp(a));
    values
}

pub fn is_hermitian(m: &CMatrix, tol: f64) -> bool {
    m.is_square() && (m - m.adjoint()).camax() <= tol
}

pub fn trace(m: &CMatrix) -> C64 {
    m.trace()
}

/// Frobenius norm of `m - I`.
pub fn identity_defect(m: &CMatrix) -> f64 {
    (m - CMatrix::identity(m.nrows(), m.ncols())).norm()
}

/// Unitary whose first columns are the given orthonormal vectors, completed by
/// Gram-Schmidt against the computational basis.
pub fn complete_basis(columns: &[CVector], dim: usize) -> CMatrix {
    let mut basis: Vec<CVector> = Vec::with_capacity(dim);
    for v in columns {
        basis.push(v.clone());
    }
    for e in 0..dim {
        if basis.len() == dim {
            break;
        }
        let mut candidate = CVector::zeros(dim);
        candidate[e] = ONE;
        for b in &basis {
            let overlap = b.dotc(&candidate);
            candidate -= b * overlap;
        }
        // second pass keeps orthogonality tight
        for b in &basis {
            let overlap = b.dotc(&candidate);
            candidate -= b * overlap;
        }
        let norm = candidate.norm();
        if norm > 1e-8 {
            basis.push(candidate / r(norm));
        }
    }
    CMatrix::from_columns(&basis)
}

/// Phase that makes the first component of `v` with modulus above `tol` real positive.
pub fn leading_phase(v: &CVector, tol: f64) -> C64 {
    v.iter()
        .find(|z| z.norm() > tol)
        .map(|z| z / r(z.norm()))
        .unwrap_or(ONE)
}

pub fn matrix_from_rows(rows: &[Vec<C64>]) -> CMatrix {
    let n = rows.len();
    let m = rows.first().map_or(0, Vec::len);
    CMatrix::from_fn(n, m, |i, j| rows[i][j])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn completed_basis_is_unitary() {
        let v = CVector::from_vec(vec![r(0.6), c(0.0, 0.8), ZERO]);
        let u = complete_basis(std::slice::from_ref(&v), 3);
        assert!(identity_defect(&(u.adjoint() * &u)) < 1e-12);
        assert!((u.column(0) - v).norm() < 1e-15);
    }

    #[test]
    fn psd_sqrt_squares_back() {
        let m = matrix_from_rows(&[vec![r(2.0), c(0.0, 1.0)], vec![c(0.0, -1.0), r(2.0)]]);
        let s = psd_sqrt(&m);
        assert!((&s * &s - &m).camax() < 1e-12);
    }

    #[test]
    fn clipping_only_touches_tiny_negatives() {
        assert_eq!(clip_eigenvalue(-5e-11, 1e-10), 0.0);
        assert_eq!(clip_eigenvalue(-2e-10, 1e-10), -2e-10);
        assert_eq!(clip_eigenvalue(0.3, 1e-10), 0.3);
    }
}
