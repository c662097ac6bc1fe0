//! Entanglement quantities and the majorization criterion for deterministic
//! pure-state conversion.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qstate::linalg::{clip_eigenvalue, hermitian_eigenvalues, psd_sqrt, r, spectrum_roots, CMatrix, ZERO};
use crate::qstate::{partial_transpose, schmidt_probabilities, BipartitePureState, DensityOperator, Subsystem, Tolerances};

/// Outcome of comparing the squared-Schmidt partial sums of an input and an output state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NielsenVerdict {
    pub holds: bool,
    /// 1-based index `l` of the first partial sum that violates the criterion.
    pub first_violating_l: Option<usize>,
    pub partial_sums_in: Vec<f64>,
    pub partial_sums_out: Vec<f64>,
}

impl NielsenVerdict {
    /// Minimum of `out[l] - in[l]`; negative exactly when the criterion fails.
    pub fn margin(&self) -> f64 {
        self.partial_sums_in
            .iter()
            .zip(&self.partial_sums_out)
            .map(|(a, b)| b - a)
            .fold(f64::INFINITY, f64::min)
    }
}

/// Decides whether `input` can be converted into `output` with certainty by
/// LOCC: every partial sum of the sorted squared Schmidt coefficients of the
/// input must not exceed that of the output. The shorter list is zero-padded.
pub fn majorization_check(input: &BipartitePureState, output: &BipartitePureState) -> NielsenVerdict {
    let tol = Tolerances::default().invariant;
    let mut x = schmidt_probabilities(input);
    let mut y = schmidt_probabilities(output);
    let len = x.len().max(y.len());
    x.resize(len, 0.0);
    y.resize(len, 0.0);

    let prefix = |v: &[f64]| -> Vec<f64> {
        v.iter()
            .scan(0.0, |acc, p| {
                *acc += p;
                Some(*acc)
            })
            .collect()
    };
    let partial_sums_in = prefix(&x);
    let partial_sums_out = prefix(&y);
    let first_violating_l = partial_sums_in
        .iter()
        .zip(&partial_sums_out)
        .position(|(a, b)| *a > b + tol)
        .map(|l| l + 1);

    NielsenVerdict { holds: first_violating_l.is_none(), first_violating_l, partial_sums_in, partial_sums_out }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Measure {
    Concurrence,
    Negativity,
    #[serde(rename = "eof_2q")]
    Eof2q,
}

impl Measure {
    pub fn name(self) -> &'static str {
        match self {
            Measure::Concurrence => "concurrence",
            Measure::Negativity => "negativity",
            Measure::Eof2q => "eof_2q",
        }
    }

    /// Measures defined for density operators of the given local dimensions.
    pub fn applicable(dims: (usize, usize)) -> Vec<Measure> {
        if dims == (2, 2) {
            vec![Measure::Negativity, Measure::Concurrence, Measure::Eof2q]
        } else {
            vec![Measure::Negativity]
        }
    }

    pub fn evaluate(self, rho: &DensityOperator) -> Result<MeasureValue> {
        let value = match self {
            Measure::Concurrence => concurrence_2q(rho)?,
            Measure::Negativity => negativity(rho),
            Measure::Eof2q => eof_2q(rho)?,
        };
        Ok(MeasureValue { measure: self, value })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasureValue {
    pub measure: Measure,
    pub value: f64,
}

fn require_two_qubits(rho: &DensityOperator) -> Result<()> {
    if rho.dims() != (2, 2) {
        return Err(Error::DimensionMismatch { expected: "2x2".into(), found: format!("{}x{}", rho.dim_a(), rho.dim_b()) });
    }
    Ok(())
}

/// `sigma_y ⊗ sigma_y`.
fn spin_flip() -> CMatrix {
    let mut m = CMatrix::from_element(4, 4, ZERO);
    // sigma_y ⊗ sigma_y = antidiag(-1, 1, 1, -1)
    m[(0, 3)] = r(-1.0);
    m[(1, 2)] = r(1.0);
    m[(2, 1)] = r(1.0);
    m[(3, 0)] = r(-1.0);
    m
}

/// Wootters concurrence `max(0, l1 - l2 - l3 - l4)`, where the `l_i` are the
/// decreasing square roots of the eigenvalues of `rho (Y⊗Y) rho* (Y⊗Y)`,
/// obtained here from the Hermitian form `sqrt(rho) rho~ sqrt(rho)`.
pub fn concurrence_2q(rho: &DensityOperator) -> Result<f64> {
    require_two_qubits(rho)?;
    let yy = spin_flip();
    let tilde = &yy * rho.matrix().map(|z| z.conj()) * &yy;
    let root = psd_sqrt(rho.matrix());
    let hermitian = &root * tilde * &root;
    let mut lambdas = spectrum_roots(&hermitian_eigenvalues(&hermitian));
    lambdas.sort_by(|a, b| b.total_cmp(a));
    let c = lambdas[0] - lambdas[1] - lambdas[2] - lambdas[3];
    Ok(c.clamp(0.0, 1.0))
}

/// Sum of the magnitudes of the negative eigenvalues of the partial transpose.
pub fn negativity(rho: &DensityOperator) -> f64 {
    let clip = Tolerances::default().eigen_clip;
    hermitian_eigenvalues(&partial_transpose(rho, Subsystem::B))
        .into_iter()
        .map(|v| clip_eigenvalue(v, clip))
        .filter(|v| *v < 0.0)
        .map(f64::abs)
        .sum()
}

/// Entanglement of formation of a two-qubit state in ebits.
pub fn eof_2q(rho: &DensityOperator) -> Result<f64> {
    Ok(eof_from_concurrence(concurrence_2q(rho)?))
}

/// `h((1 + sqrt(1 - C^2)) / 2)` with `h` the binary entropy.
pub fn eof_from_concurrence(c: f64) -> f64 {
    let c = c.clamp(0.0, 1.0);
    let x = 0.5 * (1.0 + (1.0 - c * c).max(0.0).sqrt());
    binary_entropy(x).clamp(0.0, 1.0)
}

pub fn binary_entropy(x: f64) -> f64 {
    shannon_entropy(&[x, 1.0 - x])
}

fn shannon_entropy(p: &[f64]) -> f64 {
    p.iter().filter(|&&v| v > 0.0).map(|&v| -v * v.log2()).sum::<f64>().max(0.0)
}

/// Entropy of entanglement in ebits.
pub fn pure_state_entropy(state: &BipartitePureState) -> f64 {
    shannon_entropy(&schmidt_probabilities(state))
}
