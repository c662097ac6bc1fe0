use std::fmt;

use super::linalg::{leading_phase, r, CMatrix, CVector, C64, ZERO};
use super::{Tolerances, DEGENERATE_NORM};
use crate::error::{Error, Result};

/// Pure state of a `dim_a x dim_b` bipartite system.
///
/// Amplitudes are stored row-major: index `i * dim_b + j` is the ket `|i>|j>`.
#[derive(Clone, PartialEq)]
pub struct BipartitePureState {
    dim_a: usize,
    dim_b: usize,
    amplitudes: CVector,
}

impl BipartitePureState {
    /// Builds a state from amplitudes that must already be normalized.
    pub fn new(dim_a: usize, dim_b: usize, amplitudes: Vec<C64>) -> Result<Self> {
        Self::with_tolerance(dim_a, dim_b, amplitudes, Tolerances::default().invariant)
    }

    pub fn with_tolerance(dim_a: usize, dim_b: usize, amplitudes: Vec<C64>, tol: f64) -> Result<Self> {
        check_dims(dim_a, dim_b, amplitudes.len())?;
        let amplitudes = CVector::from_vec(amplitudes);
        let norm = amplitudes.norm();
        if norm < DEGENERATE_NORM {
            return Err(Error::Degenerate { norm });
        }
        if (norm * norm - 1.0).abs() > tol {
            return Err(Error::NotNormalized { norm });
        }
        Ok(Self { dim_a, dim_b, amplitudes })
    }

    /// Builds a state by rescaling `amplitudes` to unit norm. Near-zero vectors
    /// are rejected rather than renormalized.
    pub fn normalized(dim_a: usize, dim_b: usize, amplitudes: Vec<C64>) -> Result<Self> {
        check_dims(dim_a, dim_b, amplitudes.len())?;
        Self::from_vector(dim_a, dim_b, CVector::from_vec(amplitudes))
    }

    pub(crate) fn from_vector(dim_a: usize, dim_b: usize, v: CVector) -> Result<Self> {
        let norm = v.norm();
        if norm < DEGENERATE_NORM {
            return Err(Error::Degenerate { norm });
        }
        Ok(Self { dim_a, dim_b, amplitudes: v / r(norm) })
    }

    /// Normalized superposition of computational kets `(i, j, amplitude)`.
    pub fn from_terms(dim_a: usize, dim_b: usize, terms: &[(usize, usize, C64)]) -> Result<Self> {
        let mut amps = vec![ZERO; dim_a * dim_b];
        for &(i, j, amp) in terms {
            if i >= dim_a || j >= dim_b {
                return Err(Error::InvalidDimensions(format!(
                    "ket |{i}{j}> outside a {dim_a}x{dim_b} system"
                )));
            }
            amps[i * dim_b + j] += amp;
        }
        Self::normalized(dim_a, dim_b, amps)
    }

    /// Computational basis ket `|i>|j>`.
    pub fn basis(dim_a: usize, dim_b: usize, i: usize, j: usize) -> Result<Self> {
        Self::from_terms(dim_a, dim_b, &[(i, j, r(1.0))])
    }

    /// `(|00> + ... + |d-1,d-1>) / sqrt(d)` on a `d x d` system.
    pub fn maximally_entangled(d: usize) -> Result<Self> {
        let terms: Vec<_> = (0..d).map(|k| (k, k, r(1.0))).collect();
        Self::from_terms(d, d, &terms)
    }

    pub fn dim_a(&self) -> usize {
        self.dim_a
    }

    pub fn dim_b(&self) -> usize {
        self.dim_b
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.dim_a, self.dim_b)
    }

    pub fn dim(&self) -> usize {
        self.dim_a * self.dim_b
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn amplitude(&self, i: usize, j: usize) -> C64 {
        self.amplitudes[i * self.dim_b + j]
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &Self) -> Result<C64> {
        self.require_same_dims(other)?;
        Ok(self.amplitudes.dotc(&other.amplitudes))
    }

    /// The `dim_a x dim_b` coefficient matrix `M[i][j] = <ij|psi>`.
    pub fn coefficient_matrix(&self) -> CMatrix {
        CMatrix::from_fn(self.dim_a, self.dim_b, |i, j| self.amplitude(i, j))
    }

    pub fn projector(&self) -> CMatrix {
        &self.amplitudes * self.amplitudes.adjoint()
    }

    /// `(a ⊗ b)|psi>`, unnormalized.
    pub fn apply_product(&self, a: &CMatrix, b: &CMatrix) -> Result<CVector> {
        if a.shape() != (self.dim_a, self.dim_a) || b.shape() != (self.dim_b, self.dim_b) {
            return Err(Error::DimensionMismatch {
                expected: format!("{0}x{0} and {1}x{1} local operators", self.dim_a, self.dim_b),
                found: format!("{:?} and {:?}", a.shape(), b.shape()),
            });
        }
        // (A ⊗ B) vec_row(M) = vec_row(A M B^T)
        let m = a * self.coefficient_matrix() * b.transpose();
        Ok(CVector::from_fn(self.dim(), |k, _| m[(k / self.dim_b, k % self.dim_b)]))
    }

    /// `(a ⊗ b)|psi>` renormalized.
    pub fn transformed(&self, a: &CMatrix, b: &CMatrix) -> Result<Self> {
        let v = self.apply_product(a, b)?;
        Self::from_vector(self.dim_a, self.dim_b, v)
    }

    pub(crate) fn require_same_dims(&self, other: &Self) -> Result<()> {
        if self.dims() != other.dims() {
            return Err(Error::DimensionMismatch {
                expected: format!("{}x{}", self.dim_a, self.dim_b),
                found: format!("{}x{}", other.dim_a, other.dim_b),
            });
        }
        Ok(())
    }
}

impl fmt::Debug for BipartitePureState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BipartitePureState({}x{}; ", self.dim_a, self.dim_b)?;
        let mut first = true;
        for i in 0..self.dim_a {
            for j in 0..self.dim_b {
                let z = self.amplitude(i, j);
                if z.norm() > 1e-12 {
                    if !first {
                        write!(f, " + ")?;
                    }
                    write!(f, "({:.6}{:+.6}i)|{i}{j}>", z.re, z.im)?;
                    first = false;
                }
            }
        }
        write!(f, ")")
    }
}

fn check_dims(dim_a: usize, dim_b: usize, len: usize) -> Result<()> {
    if dim_a == 0 || dim_b == 0 {
        return Err(Error::InvalidDimensions(format!("{dim_a}x{dim_b}")));
    }
    if len != dim_a * dim_b {
        return Err(Error::DimensionMismatch {
            expected: format!("{} amplitudes", dim_a * dim_b),
            found: format!("{len}"),
        });
    }
    Ok(())
}

/// `psi = sum_k coefficients[k] * left[k] ⊗ right[k]`.
#[derive(Clone, Debug)]
pub struct SchmidtDecomposition {
    pub coefficients: Vec<f64>,
    pub left_vectors: Vec<CVector>,
    pub right_vectors: Vec<CVector>,
}

impl SchmidtDecomposition {
    pub fn rank(&self) -> usize {
        self.coefficients.len()
    }

    /// Squared coefficients, the spectrum of either reduced state.
    pub fn probabilities(&self) -> Vec<f64> {
        self.coefficients.iter().map(|c| c * c).collect()
    }

    pub fn reconstruct(&self, dim_a: usize, dim_b: usize) -> CVector {
        let mut v = CVector::zeros(dim_a * dim_b);
        for ((c, u), w) in self.coefficients.iter().zip(&self.left_vectors).zip(&self.right_vectors) {
            for i in 0..dim_a {
                for j in 0..dim_b {
                    v[i * dim_b + j] += r(*c) * u[i] * w[j];
                }
            }
        }
        v
    }
}

/// Schmidt decomposition via SVD of the coefficient matrix. Coefficients not
/// above `tol` are dropped. Each left vector is phase-fixed so its first
/// nonzero component is real positive; equal coefficients are ordered by the
/// position of that component.
pub fn schmidt_decompose(state: &BipartitePureState, tol: f64) -> Result<SchmidtDecomposition> {
    let norm = state.amplitudes.norm();
    if (norm * norm - 1.0).abs() > Tolerances::default().invariant {
        return Err(Error::NotNormalized { norm });
    }
    let svd = state.coefficient_matrix().svd(true, true);
    let u = svd.u.expect("left singular vectors requested");
    let v_t = svd.v_t.expect("right singular vectors requested");

    let mut terms: Vec<(f64, CVector, CVector)> = Vec::new();
    for (k, &sigma) in svd.singular_values.iter().enumerate() {
        if sigma <= tol {
            continue;
        }
        let mut left: CVector = u.column(k).into_owned();
        let mut right: CVector = v_t.row(k).transpose().into_owned();
        let phase = leading_phase(&left, 1e-12);
        left /= phase;
        right *= phase;
        terms.push((sigma, left, right));
    }

    let lead = |v: &CVector| v.iter().position(|z| z.norm() > 1e-12).unwrap_or(usize::MAX);
    terms.sort_by(|a, b| {
        if (a.0 - b.0).abs() <= 1e-12 {
            lead(&a.1).cmp(&lead(&b.1))
        } else {
            b.0.total_cmp(&a.0)
        }
    });

    let mut out = SchmidtDecomposition {
        coefficients: Vec::with_capacity(terms.len()),
        left_vectors: Vec::with_capacity(terms.len()),
        right_vectors: Vec::with_capacity(terms.len()),
    };
    for (sigma, left, right) in terms {
        out.coefficients.push(sigma);
        out.left_vectors.push(left);
        out.right_vectors.push(right);
    }
    Ok(out)
}

/// Squared Schmidt coefficients sorted nonincreasing, zero-padded to `min(dim_a, dim_b)`.
pub fn schmidt_probabilities(state: &BipartitePureState) -> Vec<f64> {
    let mut p: Vec<f64> = super::linalg::singular_values(&state.coefficient_matrix())
        .into_iter()
        .map(|s| s * s)
        .collect();
    p.resize(state.dim_a.min(state.dim_b), 0.0);
    p
}

/// `|<a|b>|`.
pub fn fidelity_pure(a: &BipartitePureState, b: &BipartitePureState) -> Result<f64> {
    Ok(a.inner(b)?.norm().min(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qstate::linalg::c;

    fn bell() -> BipartitePureState {
        BipartitePureState::maximally_entangled(2).unwrap()
    }

    #[test]
    fn bell_schmidt_coefficients() {
        let s = schmidt_decompose(&bell(), 1e-12).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert_eq!(s.rank(), 2);
        assert!((s.coefficients[0] - h).abs() < 1e-12);
        assert!((s.coefficients[1] - h).abs() < 1e-12);
    }

    #[test]
    fn product_state_has_rank_one() {
        let s = schmidt_decompose(&BipartitePureState::basis(2, 2, 0, 1).unwrap(), 1e-12).unwrap();
        assert_eq!(s.coefficients.len(), 1);
        assert!((s.coefficients[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn three_term_state_coefficients() {
        let phi = BipartitePureState::from_terms(
            3,
            3,
            &[(0, 0, r(0.8f64.sqrt())), (1, 1, r(0.1f64.sqrt())), (2, 2, r(0.1f64.sqrt()))],
        )
        .unwrap();
        let s = schmidt_decompose(&phi, 1e-12).unwrap();
        let expected = [0.8f64.sqrt(), 0.1f64.sqrt(), 0.1f64.sqrt()];
        for (got, want) in s.coefficients.iter().zip(expected) {
            assert!((got - want).abs() < 1e-12);
        }
        assert!((s.reconstruct(3, 3) - phi.amplitudes()).norm() < 1e-12);
    }

    #[test]
    fn rejects_unnormalized_and_degenerate() {
        assert!(matches!(
            BipartitePureState::new(2, 2, vec![r(1.0), r(1.0), ZERO, ZERO]),
            Err(Error::NotNormalized { .. })
        ));
        assert!(matches!(
            BipartitePureState::normalized(2, 2, vec![r(1e-13), ZERO, ZERO, ZERO]),
            Err(Error::Degenerate { .. })
        ));
        assert!(BipartitePureState::new(2, 2, vec![r(1.0)]).is_err());
    }

    #[test]
    fn fidelity_examples() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let plus = bell();
        let minus = BipartitePureState::new(2, 2, vec![r(h), ZERO, ZERO, r(-h)]).unwrap();
        assert!(fidelity_pure(&plus, &minus).unwrap() < 1e-15);
        assert!((fidelity_pure(&plus, &plus).unwrap() - 1.0).abs() < 1e-12);

        let (a, b) = (0.8f64.sqrt(), 0.2f64.sqrt());
        let x = BipartitePureState::new(2, 2, vec![r(a), ZERO, ZERO, r(b)]).unwrap();
        let y = BipartitePureState::new(2, 2, vec![r(b), ZERO, ZERO, r(a)]).unwrap();
        assert!((fidelity_pure(&x, &y).unwrap() - 0.8).abs() < 1e-12);

        let z = BipartitePureState::basis(3, 2, 0, 0).unwrap();
        assert!(fidelity_pure(&plus, &z).is_err());
    }

    #[test]
    fn apply_product_matches_kronecker() {
        let psi = BipartitePureState::normalized(2, 3, (0..6).map(|k| c(k as f64, 1.0)).collect()).unwrap();
        let a = CMatrix::from_fn(2, 2, |i, j| c(i as f64 + 1.0, j as f64));
        let b = CMatrix::from_fn(3, 3, |i, j| c(j as f64, -(i as f64)));
        let direct = a.kronecker(&b) * psi.amplitudes();
        assert!((psi.apply_product(&a, &b).unwrap() - direct).norm() < 1e-12);
    }
}
