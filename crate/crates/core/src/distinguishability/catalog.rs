//! Named state sets whose local-distinguishability status is known from the
//! literature.

use crate::qstate::linalg::{r, C64};
use crate::qstate::BipartitePureState;

const H: f64 = std::f64::consts::FRAC_1_SQRT_2;

fn state(d_a: usize, d_b: usize, terms: &[(usize, usize, f64)]) -> BipartitePureState {
    let terms: Vec<(usize, usize, C64)> = terms.iter().map(|&(i, j, a)| (i, j, r(a))).collect();
    BipartitePureState::from_terms(d_a, d_b, &terms).expect("catalog states are well formed")
}

/// `Phi+, Phi-, Psi+, Psi-`.
pub fn bell_basis() -> Vec<BipartitePureState> {
    vec![
        state(2, 2, &[(0, 0, H), (1, 1, H)]),
        state(2, 2, &[(0, 0, H), (1, 1, -H)]),
        state(2, 2, &[(0, 1, H), (1, 0, H)]),
        state(2, 2, &[(0, 1, H), (1, 0, -H)]),
    ]
}

/// The nine-state 3x3 orthogonal product basis of Bennett et al. (1999).
pub fn nlwe_basis() -> Vec<BipartitePureState> {
    vec![
        state(3, 3, &[(1, 1, 1.0)]),
        state(3, 3, &[(0, 0, H), (0, 1, H)]),
        state(3, 3, &[(0, 0, H), (0, 1, -H)]),
        state(3, 3, &[(2, 1, H), (2, 2, H)]),
        state(3, 3, &[(2, 1, H), (2, 2, -H)]),
        state(3, 3, &[(1, 0, H), (2, 0, H)]),
        state(3, 3, &[(1, 0, H), (2, 0, -H)]),
        state(3, 3, &[(0, 2, H), (1, 2, H)]),
        state(3, 3, &[(0, 2, H), (1, 2, -H)]),
    ]
}

/// Three 4x4 states of Yu and Duan (2014): a Bell state on the first qubit
/// pair tensored with `sqrt(2/3)|00> + sqrt(1/3)|11>` on the second pair.
/// Local index is `2 * first_qubit + second_qubit` on each side.
pub fn yu_duan_triple() -> Vec<BipartitePureState> {
    let ancilla = [(0usize, 0usize, (2.0f64 / 3.0).sqrt()), (1, 1, (1.0f64 / 3.0).sqrt())];
    let bells: [&[(usize, usize, f64)]; 3] =
        [&[(0, 0, H), (1, 1, H)], &[(0, 0, H), (1, 1, -H)], &[(0, 1, H), (1, 0, H)]];
    bells
        .iter()
        .map(|bell| {
            let mut terms = Vec::new();
            for &(a1, b1, x) in bell.iter() {
                for &(a2, b2, y) in &ancilla {
                    terms.push((2 * a1 + a2, 2 * b1 + b2, x * y));
                }
            }
            state(4, 4, &terms)
        })
        .collect()
}

/// `Phi+, Phi-, Psi+` supported on the local subspaces `span{|2>, |3>}` of a
/// 4x4 system (Bandyopadhyay 2015).
pub fn embedded_bell_triple() -> Vec<BipartitePureState> {
    vec![
        state(4, 4, &[(2, 2, H), (3, 3, H)]),
        state(4, 4, &[(2, 2, H), (3, 3, -H)]),
        state(4, 4, &[(2, 3, H), (3, 2, H)]),
    ]
}

/// Catalogued sets that no LOCC protocol distinguishes perfectly with certainty.
pub fn locc_indistinguishable_sets() -> Vec<(&'static str, Vec<BipartitePureState>)> {
    vec![
        ("bell-basis", bell_basis()),
        ("nlwe-basis", nlwe_basis()),
        ("yu-duan", yu_duan_triple()),
        ("bell-triple-4x4", embedded_bell_triple()),
    ]
}

/// Name of a catalogued indistinguishable set contained in `states`, matched
/// state by state up to a global phase. No local-unitary canonicalization.
pub fn contained_indistinguishable_set(states: &[BipartitePureState]) -> Option<&'static str> {
    let dims = states.first()?.dims();
    locc_indistinguishable_sets().into_iter().find_map(|(name, set)| {
        let all_present = set.first().is_some_and(|s| s.dims() == dims)
            && set.iter().all(|target| {
                states.iter().any(|s| s.amplitudes().dotc(target.amplitudes()).norm() >= 1.0 - 1e-9)
            });
        all_present.then_some(name)
    })
}
