use serde::{Deserialize, Serialize};

use super::linalg::{hermitian_eigenvalues, is_hermitian, psd_sqrt, r, singular_values, spectrum_roots, CMatrix, ZERO};
use super::state::BipartitePureState;
use super::Tolerances;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Subsystem {
    A,
    B,
}

/// Density operator on a `dim_a x dim_b` system, validated on construction.
#[derive(Clone, Debug)]
pub struct DensityOperator {
    dim_a: usize,
    dim_b: usize,
    matrix: CMatrix,
}

impl DensityOperator {
    pub fn new(dim_a: usize, dim_b: usize, matrix: CMatrix) -> Result<Self> {
        Self::with_tolerance(dim_a, dim_b, matrix, Tolerances::default().invariant)
    }

    pub fn with_tolerance(dim_a: usize, dim_b: usize, matrix: CMatrix, tol: f64) -> Result<Self> {
        let d = dim_a * dim_b;
        if d == 0 || matrix.shape() != (d, d) {
            return Err(Error::InvalidDensity(format!(
                "expected {d}x{d} matrix for a {dim_a}x{dim_b} system, found {:?}",
                matrix.shape()
            )));
        }
        if !is_hermitian(&matrix, tol) {
            return Err(Error::InvalidDensity("matrix is not Hermitian".into()));
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > tol || tr.im.abs() > tol {
            return Err(Error::InvalidDensity(format!("trace is {tr}, expected 1")));
        }
        let min = hermitian_eigenvalues(&matrix).first().copied().unwrap_or(0.0);
        if min < -tol {
            return Err(Error::InvalidDensity(format!("negative eigenvalue {min:e}")));
        }
        Ok(Self { dim_a, dim_b, matrix })
    }

    pub fn from_pure(state: &BipartitePureState) -> Self {
        Self { dim_a: state.dim_a(), dim_b: state.dim_b(), matrix: state.projector() }
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

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigenvalues(&self.matrix)
    }

    /// `(a ⊗ b) rho (a ⊗ b)†` without renormalization.
    pub fn conjugate_by_product(&self, a: &CMatrix, b: &CMatrix) -> CMatrix {
        let k = a.kronecker(b);
        &k * &self.matrix * k.adjoint()
    }

    pub(crate) fn from_parts_unchecked(dim_a: usize, dim_b: usize, matrix: CMatrix) -> Self {
        Self { dim_a, dim_b, matrix }
    }
}

/// Partial transpose of a `dim_a*dim_b` square matrix on the given subsystem.
pub fn partial_transpose_matrix(m: &CMatrix, dim_a: usize, dim_b: usize, subsystem: Subsystem) -> CMatrix {
    let d = dim_a * dim_b;
    let mut out = CMatrix::from_element(d, d, ZERO);
    for i in 0..dim_a {
        for j in 0..dim_b {
            for k in 0..dim_a {
                for l in 0..dim_b {
                    // <ij|M|kl>
                    let value = m[(i * dim_b + j, k * dim_b + l)];
                    let (row, col) = match subsystem {
                        Subsystem::A => (k * dim_b + j, i * dim_b + l),
                        Subsystem::B => (i * dim_b + l, k * dim_b + j),
                    };
                    out[(row, col)] = value;
                }
            }
        }
    }
    out
}

pub fn partial_transpose(rho: &DensityOperator, subsystem: Subsystem) -> CMatrix {
    partial_transpose_matrix(&rho.matrix, rho.dim_a, rho.dim_b, subsystem)
}

/// Reduced state after tracing out `traced`.
pub fn partial_trace(rho: &DensityOperator, traced: Subsystem) -> CMatrix {
    let (da, db) = rho.dims();
    let m = &rho.matrix;
    match traced {
        Subsystem::B => CMatrix::from_fn(da, da, |i, k| (0..db).map(|j| m[(i * db + j, k * db + j)]).sum()),
        Subsystem::A => CMatrix::from_fn(db, db, |j, l| (0..da).map(|i| m[(i * db + j, i * db + l)]).sum()),
    }
}

/// Sum of singular values.
pub fn trace_norm(m: &CMatrix) -> f64 {
    singular_values(m).iter().sum()
}

/// Uhlmann fidelity `Tr sqrt(sqrt(s) r sqrt(s))`.
pub fn fidelity_mixed(rho: &DensityOperator, sigma: &DensityOperator) -> Result<f64> {
    if rho.dims() != sigma.dims() {
        return Err(Error::DimensionMismatch {
            expected: format!("{:?}", rho.dims()),
            found: format!("{:?}", sigma.dims()),
        });
    }
    let tol = Tolerances::default();
    for m in [rho, sigma] {
        let min = m.eigenvalues().first().copied().unwrap_or(0.0);
        if min < -tol.invariant {
            return Err(Error::InvalidDensity(format!("negative eigenvalue {min:e}")));
        }
    }
    let root = psd_sqrt(&sigma.matrix);
    let inner = &root * &rho.matrix * &root;
    let f: f64 = spectrum_roots(&hermitian_eigenvalues(&inner)).into_iter().sum();
    Ok(f.clamp(0.0, 1.0))
}

/// Probability-weighted list of pure states with strictly interior weights.
#[derive(Clone, Debug)]
pub struct Ensemble {
    probs: Vec<f64>,
    states: Vec<BipartitePureState>,
}

impl Ensemble {
    pub fn new(probs: Vec<f64>, states: Vec<BipartitePureState>) -> Result<Self> {
        validate_weights(&probs, states.len(), false)?;
        check_common_dims(&states)?;
        Ok(Self { probs, states })
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn states(&self) -> &[BipartitePureState] {
        &self.states
    }

    pub fn density(&self) -> DensityOperator {
        mixture(&self.probs, &self.states)
    }
}

/// `sum_i p_i |psi_i><psi_i|`. Weights may sit on the simplex boundary here.
pub fn ensemble_density(probs: &[f64], states: &[BipartitePureState]) -> Result<DensityOperator> {
    validate_weights(probs, states.len(), true)?;
    check_common_dims(states)?;
    Ok(mixture(probs, states))
}

pub(crate) fn mixture(probs: &[f64], states: &[BipartitePureState]) -> DensityOperator {
    let (da, db) = states[0].dims();
    let d = da * db;
    let mut m = CMatrix::from_element(d, d, ZERO);
    for (p, s) in probs.iter().zip(states) {
        let v = s.amplitudes();
        for i in 0..d {
            let vi = v[i] * r(*p);
            for j in 0..d {
                m[(i, j)] += vi * v[j].conj();
            }
        }
    }
    DensityOperator::from_parts_unchecked(da, db, m)
}

fn validate_weights(probs: &[f64], count: usize, allow_boundary: bool) -> Result<()> {
    if probs.len() != count || count == 0 {
        return Err(Error::InvalidDistribution(format!(
            "{} weights for {count} states",
            probs.len()
        )));
    }
    let tol = Tolerances::default().invariant;
    for &p in probs {
        let ok = if allow_boundary { (0.0..=1.0).contains(&p) } else { p > 0.0 && p < 1.0 };
        if !ok {
            return Err(Error::InvalidDistribution(format!("weight {p} out of range")));
        }
    }
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > tol {
        return Err(Error::InvalidDistribution(format!("weights sum to {total}")));
    }
    Ok(())
}

fn check_common_dims(states: &[BipartitePureState]) -> Result<()> {
    if let Some(first) = states.first() {
        for s in &states[1..] {
            first.require_same_dims(s)?;
        }
    }
    Ok(())
}
