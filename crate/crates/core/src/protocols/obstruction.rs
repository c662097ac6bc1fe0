//! Can a single product operator `A ⊗ B` send `Phi+ -> mu_1 phi_1` and
//! `Phi- -> mu_2 phi_2` with `mu_1 mu_2 != 0`?
//!
//! With `|00> = (Phi+ + Phi-)/sqrt2` and `|11> = (Phi+ - Phi-)/sqrt2`, the
//! images `(A ⊗ B)|00> = A|0> ⊗ B|0>` and `(A ⊗ B)|11>` are product vectors, so
//! `mu_1 phi_1 ± mu_2 phi_2` must both have Schmidt rank at most one. With
//! `r = mu_1 / mu_2` and `Phi_i` the coefficient matrices of the outputs this
//! reads `det(r Phi_1 + Phi_2) = 0` and `det(r Phi_1 - Phi_2) = 0`: two
//! quadratics in `r` whose root sets must intersect away from zero.
//! Conversely any common root gives `A = [a_0 a_1]`, `B = [b_0 b_1]` from
//! rank-one factorizations, so the test is exact.
//!
//! Each Kraus branch of a separable map realizing the set transformation must
//! satisfy these equations branch by branch, so infeasibility for one branch
//! rules out every separable (hence every LOCC) realization. Branches with
//! `mu_1 = 0` or `mu_2 = 0` need a product output and are handled separately.

use super::ProductKraus;
use crate::conditions::SetPair;
use crate::error::{Error, Result};
use crate::qstate::linalg::{c, r, CMatrix, CVector, C64, ZERO};
use crate::qstate::BipartitePureState;

const ROOT_TOL: f64 = 1e-9;
const REPLAY_TOL: f64 = 1e-7;

/// Values of `mu_1 / mu_2` for which one of the two images is a product vector.
#[derive(Clone, Debug, PartialEq)]
pub enum RatioSet {
    All,
    Finite(Vec<C64>),
}

impl RatioSet {
    fn contains(&self, z: C64) -> bool {
        match self {
            RatioSet::All => true,
            RatioSet::Finite(roots) => roots.iter().any(|w| (w - z).norm() <= ROOT_TOL * w.norm().max(1.0)),
        }
    }

    pub fn describe(&self) -> String {
        match self {
            RatioSet::All => "all ratios".into(),
            RatioSet::Finite(roots) if roots.is_empty() => "no ratio".into(),
            RatioSet::Finite(roots) => {
                let parts: Vec<String> = roots.iter().map(|z| format_complex(*z)).collect();
                format!("{{{}}}", parts.join(", "))
            }
        }
    }
}

fn format_complex(z: C64) -> String {
    if z.im.abs() <= 1e-12 {
        format!("{:.6}", z.re)
    } else {
        format!("{:.6}{:+.6}i", z.re, z.im)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct KrausWitness {
    pub kraus: ProductKraus,
    pub mu1: C64,
    pub mu2: C64,
}

impl KrausWitness {
    /// `max_i ||(A ⊗ B)|psi_i> - mu_i |phi_i>||`.
    pub fn residual(&self, pair: &SetPair) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for (i, mu) in [self.mu1, self.mu2].into_iter().enumerate() {
            let image = self.kraus.apply(&pair.inputs()[i])?;
            let target = pair.outputs()[i].amplitudes() * mu;
            worst = worst.max((image - target).norm());
        }
        Ok(worst)
    }
}

#[derive(Clone, Debug)]
pub struct FeasibilityVerdict {
    pub feasible: bool,
    pub witness: Option<KrausWitness>,
    pub obstruction: Option<String>,
    /// Ratios making `mu_1 phi_1 + mu_2 phi_2` and `mu_1 phi_1 - mu_2 phi_2` product.
    pub ratio_sets: [RatioSet; 2],
}

/// Roots of `a r^2 + b r + c`.
fn quadratic_roots(a: C64, b: C64, c0: C64) -> RatioSet {
    let scale = a.norm().max(b.norm()).max(c0.norm());
    if scale <= ROOT_TOL {
        return RatioSet::All;
    }
    let tiny = |z: C64| z.norm() <= ROOT_TOL * scale;
    if tiny(a) {
        if tiny(b) {
            return RatioSet::Finite(Vec::new());
        }
        return RatioSet::Finite(vec![-c0 / b]);
    }
    let disc = (b * b - a * c0 * 4.0).sqrt();
    let mut roots = vec![(-b + disc) / (a * 2.0), (-b - disc) / (a * 2.0)];
    if (roots[0] - roots[1]).norm() <= ROOT_TOL * roots[0].norm().max(1.0) {
        roots.pop();
    }
    RatioSet::Finite(roots)
}

fn det2(m: &CMatrix) -> C64 {
    m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)]
}

/// `det(r X + s Y)` as a quadratic in `r` for `s = ±1`.
fn ratio_set(x: &CMatrix, y: &CMatrix, sign: f64) -> RatioSet {
    let cross = x[(0, 0)] * y[(1, 1)] + x[(1, 1)] * y[(0, 0)] - x[(0, 1)] * y[(1, 0)] - x[(1, 0)] * y[(0, 1)];
    quadratic_roots(det2(x), cross * sign, det2(y))
}

/// `a b^T = m` for a matrix of rank at most one.
fn rank_one_factors(m: &CMatrix) -> (CVector, CVector) {
    let svd = m.clone().svd(true, true);
    let s = svd.singular_values[0];
    if s <= 1e-15 {
        return (CVector::zeros(m.nrows()), CVector::zeros(m.ncols()));
    }
    let u = svd.u.expect("requested");
    let v_t = svd.v_t.expect("requested");
    let a: CVector = u.column(0) * r(s.sqrt());
    let b: CVector = v_t.row(0).transpose() * r(s.sqrt());
    (a, b)
}

/// Global phase `e^{i theta}` with `state = e^{i theta} target`, if any.
fn phase_against(state: &BipartitePureState, target: &[C64]) -> Option<C64> {
    let overlap: C64 = target.iter().zip(state.amplitudes().iter()).map(|(t, s)| t.conj() * s).sum();
    (overlap.norm() >= 1.0 - 1e-9).then(|| overlap / overlap.norm())
}

fn is_product(m: &CMatrix) -> bool {
    let svd = m.clone().svd(false, false);
    let mut s: Vec<f64> = svd.singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s.get(1).is_none_or(|x| *x <= 1e-9)
}

/// Single-branch product-Kraus feasibility for two-qubit pairs whose inputs
/// are `Phi+` and `Phi-` (each up to a global phase), in that order.
pub fn product_kraus_feasibility(pair: &SetPair) -> Result<FeasibilityVerdict> {
    if pair.len() != 2 || pair.input_dims() != (2, 2) || pair.output_dims() != (2, 2) {
        return Err(Error::UnsupportedForm("needs two input-output pairs on two qubits".into()));
    }
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let phi_plus = [r(h), ZERO, ZERO, r(h)];
    let phi_minus = [r(h), ZERO, ZERO, r(-h)];
    let (Some(phase1), Some(phase2)) =
        (phase_against(&pair.inputs()[0], &phi_plus), phase_against(&pair.inputs()[1], &phi_minus))
    else {
        return Err(Error::UnsupportedForm(
            "inputs must be (|00> + |11>)/sqrt2 and (|00> - |11>)/sqrt2 up to global phases".into(),
        ));
    };

    let m1 = pair.outputs()[0].coefficient_matrix();
    let m2 = pair.outputs()[1].coefficient_matrix();
    let plus = ratio_set(&m1, &m2, 1.0);
    let minus = ratio_set(&m1, &m2, -1.0);

    let candidates: Vec<C64> = match (&plus, &minus) {
        (RatioSet::All, RatioSet::All) => vec![c(1.0, 0.0)],
        (RatioSet::Finite(roots), other) | (other, RatioSet::Finite(roots)) => {
            roots.iter().copied().filter(|z| other.contains(*z)).collect()
        }
    };
    let mut nonzero: Vec<C64> = candidates.into_iter().filter(|z| z.norm() > ROOT_TOL).collect();
    nonzero.sort_by(|a, b| (a - c(1.0, 0.0)).norm().total_cmp(&(b - c(1.0, 0.0)).norm()));

    let ratio_sets = [plus, minus];
    if let Some(&ratio) = nonzero.first() {
        // A|0> ⊗ B|0> = (r phi_1 + phi_2)/sqrt2 and A|1> ⊗ B|1> = (r phi_1 - phi_2)/sqrt2
        let (a0, b0) = rank_one_factors(&((&m1 * ratio + &m2) * r(h)));
        let (a1, b1) = rank_one_factors(&((&m1 * ratio - &m2) * r(h)));
        let kraus = ProductKraus::new(CMatrix::from_columns(&[a0, a1]), CMatrix::from_columns(&[b0, b1]));
        // (A ⊗ B)psi_i = phase_i * mu'_i phi_i with mu'_1 = r, mu'_2 = 1
        let witness = KrausWitness { kraus, mu1: phase1 * ratio, mu2: phase2 };
        let residual = witness.residual(pair)?;
        if residual > REPLAY_TOL {
            return Err(Error::MalformedProtocol(format!("witness replay failed with residual {residual:e}")));
        }
        return Ok(FeasibilityVerdict { feasible: true, witness: Some(witness), obstruction: None, ratio_sets });
    }

    let degenerate: Vec<&str> = [("mu_2 = 0 needs phi_1 product", &m1), ("mu_1 = 0 needs phi_2 product", &m2)]
        .into_iter()
        .filter(|(_, m)| is_product(m))
        .map(|(what, _)| what)
        .collect();
    if !degenerate.is_empty() {
        return Err(Error::UnsupportedForm(format!(
            "no branch with both mu nonzero, but degenerate branches are admissible ({}); single-branch analysis is inconclusive",
            degenerate.join("; ")
        )));
    }
    let obstruction = format!(
        "ratio sets disjoint: mu_1/mu_2 must lie in {} for (A⊗B)|00> to be product and in {} for (A⊗B)|11> to be product; \
         a branch with mu_1 = 0 or mu_2 = 0 would map a product vector onto a multiple of an entangled output",
        ratio_sets[0].describe(),
        ratio_sets[1].describe()
    );
    Ok(FeasibilityVerdict { feasible: false, witness: None, obstruction: Some(obstruction), ratio_sets })
}

#[cfg(test)]
mod tests {
    use super::*;

    const H: f64 = std::f64::consts::FRAC_1_SQRT_2;

    fn two_qubit(amps: [f64; 4]) -> BipartitePureState {
        BipartitePureState::new(2, 2, amps.iter().map(|&a| r(a)).collect()).unwrap()
    }

    fn family(alpha_sq: f64) -> SetPair {
        let (a, b) = (alpha_sq.sqrt(), (1.0 - alpha_sq).sqrt());
        SetPair::new(
            vec![two_qubit([H, 0.0, 0.0, H]), two_qubit([H, 0.0, 0.0, -H])],
            vec![two_qubit([a, 0.0, 0.0, b]), two_qubit([b, 0.0, 0.0, -a])],
        )
        .unwrap()
    }

    #[test]
    fn family_is_infeasible_off_balance() {
        let v = product_kraus_feasibility(&family(0.8)).unwrap();
        assert!(!v.feasible);
        assert!(v.obstruction.unwrap().contains("ratio sets disjoint"));
        let (a, b) = (0.8f64.sqrt(), 0.2f64.sqrt());
        let RatioSet::Finite(first) = &v.ratio_sets[0] else { panic!() };
        assert!(first.iter().any(|z| (z.re + b / a).abs() < 1e-9));
        assert!(first.iter().any(|z| (z.re - a / b).abs() < 1e-9));
        let RatioSet::Finite(second) = &v.ratio_sets[1] else { panic!() };
        assert!(second.iter().any(|z| (z.re - b / a).abs() < 1e-9));
        assert!(second.iter().any(|z| (z.re + a / b).abs() < 1e-9));
    }

    #[test]
    fn balanced_family_is_identity() {
        let pair = family(0.5);
        let v = product_kraus_feasibility(&pair).unwrap();
        assert!(v.feasible);
        let w = v.witness.unwrap();
        assert!((w.mu1 - c(1.0, 0.0)).norm() < 1e-9 && (w.mu2 - c(1.0, 0.0)).norm() < 1e-9);
        assert!((w.kraus.a_op.clone() - CMatrix::identity(2, 2)).norm() < 1e-9);
        assert!(w.residual(&pair).unwrap() < 1e-12);
    }

    #[test]
    fn local_unitary_outputs_are_feasible() {
        let u = CMatrix::from_row_slice(2, 2, &[r(0.6), r(-0.8), r(0.8), r(0.6)]);
        let v = CMatrix::from_row_slice(2, 2, &[c(0.0, 1.0), ZERO, ZERO, r(1.0)]);
        let inputs = vec![two_qubit([H, 0.0, 0.0, H]), two_qubit([H, 0.0, 0.0, -H])];
        let outputs: Vec<_> = inputs.iter().map(|s| s.transformed(&u, &v).unwrap()).collect();
        let pair = SetPair::new(inputs, outputs).unwrap();
        let verdict = product_kraus_feasibility(&pair).unwrap();
        assert!(verdict.feasible);
        assert!(verdict.witness.unwrap().residual(&pair).unwrap() < 1e-9);
    }

    #[test]
    fn other_inputs_are_unsupported() {
        let pair = SetPair::new(
            vec![two_qubit([1.0, 0.0, 0.0, 0.0]), two_qubit([0.0, 0.0, 0.0, 1.0])],
            vec![two_qubit([1.0, 0.0, 0.0, 0.0]), two_qubit([0.0, 0.0, 0.0, 1.0])],
        )
        .unwrap();
        assert!(matches!(product_kraus_feasibility(&pair), Err(Error::UnsupportedForm(_))));
    }
}
