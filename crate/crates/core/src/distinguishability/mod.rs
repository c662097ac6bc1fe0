//! Perfect local distinguishability of orthogonal pure-state sets.
//!
//! The general question is open, so [`locc_distinguishable`] is a cascade of
//! sound rules that answers YES or NO only when one of them fires:
//!
//! | rule | condition | verdict |
//! |------|-----------|---------|
//! | R1   | states not pairwise orthogonal | NO (not even globally) |
//! | R2   | exactly two orthogonal states | YES (Walgate et al. 2000) |
//! | R3   | every state is a computational-basis product ket | YES |
//! | R4   | three orthogonal two-qubit states | YES iff at least two are product (Walgate-Hardy 2002) |
//! | R5   | contains a catalogued LOCC-indistinguishable set | NO |
//! | R3b  | a one-round local projective measurement coarse-graining the computational bases separates the states | YES |
//! | R6   | anything else | UNKNOWN |
//!
//! Sets that can be told apart perfectly but only with probability below one
//! count as indistinguishable.

pub mod catalog;
mod facts;

pub use facts::{class_distinguishable, KnownFact, KnownFactTable, OpClass};

use crate::qstate::{schmidt_probabilities, BipartitePureState};
use crate::verdict::TriState;

const SUPPORT_EPS: f64 = 1e-12;

/// True iff every pair has `|<a|b>| <= tol`.
pub fn pairwise_orthogonal(states: &[BipartitePureState], tol: f64) -> bool {
    worst_overlap(states).is_none_or(|(_, _, overlap)| overlap <= tol)
}

/// Largest `|<a|b>|` over distinct pairs.
pub(crate) fn worst_overlap(states: &[BipartitePureState]) -> Option<(usize, usize, f64)> {
    let mut worst: Option<(usize, usize, f64)> = None;
    for i in 0..states.len() {
        for j in i + 1..states.len() {
            let overlap = states[i].amplitudes().dotc(states[j].amplitudes()).norm();
            if worst.is_none_or(|(_, _, w)| overlap > w) {
                worst = Some((i, j, overlap));
            }
        }
    }
    worst
}

/// True iff the second Schmidt coefficient is at most `tol`.
pub fn is_product(state: &BipartitePureState, tol: f64) -> bool {
    schmidt_probabilities(state).get(1).is_none_or(|p| p.sqrt() <= tol)
}

fn is_computational_ket(state: &BipartitePureState) -> bool {
    state.amplitudes().iter().filter(|z| z.norm() > SUPPORT_EPS).count() == 1
}

/// Rule cascade; the first rule that fires decides.
pub fn locc_distinguishable(states: &[BipartitePureState]) -> TriState {
    let tol = crate::qstate::Tolerances::default().invariant;
    let same_dims = states.windows(2).all(|w| w[0].dims() == w[1].dims());
    if !same_dims {
        return TriState::unknown("R6", "states do not share local dimensions");
    }
    if states.len() < 2 {
        return TriState::yes("R0", "a single state is trivially identified");
    }

    if let Some((i, j, overlap)) = worst_overlap(states).filter(|w| w.2 > tol) {
        return TriState::no(
            "R1",
            format!("states {i} and {j} overlap with |<a|b>| = {overlap:.6}; no measurement separates them perfectly"),
        );
    }
    if states.len() == 2 {
        return TriState::yes("R2", "any two orthogonal pure states are perfectly distinguishable by LOCC (Walgate et al. 2000)");
    }
    if states.iter().all(is_computational_ket) {
        return TriState::yes("R3", "all states are distinct computational-basis product kets");
    }
    if states.len() == 3 && states[0].dims() == (2, 2) {
        let products = states.iter().filter(|s| is_product(s, 1e-9)).count();
        let detail = format!("{products} of 3 orthogonal two-qubit states are product (Walgate-Hardy 2002)");
        return if products >= 2 { TriState::yes("R4", detail) } else { TriState::no("R4", detail) };
    }
    if let Some(name) = catalog::contained_indistinguishable_set(states) {
        return TriState::no("R5", format!("contains the locally indistinguishable set `{name}`"));
    }
    if let Some(strategy) = computational_grouping_strategy(states) {
        return TriState::yes("R3b", format!("local projective measurement separates the states: {strategy}"));
    }
    TriState::unknown("R6", "no decidable rule applies")
}

/// A coarse-graining of Alice's and Bob's computational-basis measurements.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LocalGrouping {
    pub alice: Vec<Vec<usize>>,
    pub bob: Vec<Vec<usize>>,
}

impl std::fmt::Display for LocalGrouping {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Alice projects onto {:?}, Bob onto {:?}", self.alice, self.bob)
    }
}

/// Exhaustive search over pairs of partitions of the local computational
/// bases, fewest projectors first. Returns the first grouping whose product
/// outcomes each receive weight from at most one state.
pub fn computational_grouping_strategy(states: &[BipartitePureState]) -> Option<LocalGrouping> {
    let (da, db) = states.first()?.dims();
    let weights: Vec<Vec<f64>> = states
        .iter()
        .map(|s| s.amplitudes().iter().map(|z| z.norm_sqr()).collect())
        .collect();

    let parts_a = set_partitions(da);
    let parts_b = set_partitions(db);
    let mut candidates: Vec<_> =
        parts_a.iter().flat_map(|pa| parts_b.iter().map(move |pb| (pa, pb))).collect();
    candidates.sort_by_key(|(pa, pb)| pa.len() * pb.len());

    candidates
        .into_iter()
        .find(|(pa, pb)| {
            pa.iter().all(|block_a| {
                pb.iter().all(|block_b| {
                    let hits = weights
                        .iter()
                        .filter(|w| {
                            let mass: f64 =
                                block_a.iter().flat_map(|&a| block_b.iter().map(move |&b| w[a * db + b])).sum();
                            mass > SUPPORT_EPS
                        })
                        .count();
                    hits <= 1
                })
            })
        })
        .map(|(pa, pb)| LocalGrouping { alice: pa.clone(), bob: pb.clone() })
}

/// All set partitions of `{0, .., n-1}` via restricted growth strings.
fn set_partitions(n: usize) -> Vec<Vec<Vec<usize>>> {
    fn grow(prefix: &mut Vec<usize>, n: usize, out: &mut Vec<Vec<Vec<usize>>>) {
        if prefix.len() == n {
            let blocks = prefix.iter().max().map_or(0, |m| m + 1);
            let mut partition = vec![Vec::new(); blocks];
            for (element, &block) in prefix.iter().enumerate() {
                partition[block].push(element);
            }
            out.push(partition);
            return;
        }
        let next = prefix.iter().max().map_or(0, |m| m + 1);
        for block in 0..=next {
            prefix.push(block);
            grow(prefix, n, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    grow(&mut Vec::with_capacity(n), n, &mut out);
    out
}
