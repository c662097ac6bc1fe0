//! Protocol synthesis: deterministic pure-state conversion, subspace
//! measurements, and identify-and-prepare strategies built from them.
//!
//! A conversion `psi -> phi` with `x ≺ y` (squared Schmidt coefficients of
//! `psi` and `phi`) is realized by walking a chain of T-transforms
//! `y = z_0 -> z_1 -> .. -> z_K = x`, each `z_{m+1} = t z_m + (1 - t) Q z_m`
//! with `Q` a transposition. Undoing one step is a two-outcome measurement by
//! Alice, diagonal in her Schmidt basis, where the second outcome is followed
//! by the swap `Q` on both sides. A final local unitary rotates the Schmidt
//! bases of the input onto those of the output.

use super::{Branch, Node, Party, ProductKraus, Protocol};
use crate::conditions::SetPair;
use crate::entanglement::majorization_check;
use crate::error::{Error, Result};
use crate::qstate::linalg::{complete_basis, identity_defect, r, CMatrix, ONE};
use crate::qstate::{schmidt_decompose, BipartitePureState};

const LEVEL_EPS: f64 = 1e-13;
const SCHMIDT_TOL: f64 = 1e-10;
const SUPPORT_EPS: f64 = 1e-12;

#[derive(Clone, Debug)]
struct TStep {
    t: f64,
    j: usize,
    k: usize,
    /// `z_m`, the side closer to the target.
    from: Vec<f64>,
    /// `z_{m+1}`.
    to: Vec<f64>,
}

/// T-transforms taking `y` to `x`, assuming `x ≺ y` and both sorted nonincreasing.
fn t_transform_chain(x: &[f64], y: &[f64]) -> Result<Vec<TStep>> {
    let d = x.len();
    let mut z = y.to_vec();
    let mut steps = Vec::new();
    for _ in 0..4 * d.max(1) {
        let Some(j) = (0..d).rev().find(|&i| z[i] - x[i] > LEVEL_EPS) else {
            break;
        };
        let Some(k) = (j + 1..d).find(|&i| x[i] - z[i] > LEVEL_EPS) else {
            break;
        };
        let delta = (z[j] - x[j]).min(x[k] - z[k]);
        let gap = z[j] - z[k];
        let t = 1.0 - delta / gap;
        let mut next = z.clone();
        next[j] = t * z[j] + (1.0 - t) * z[k];
        next[k] = t * z[k] + (1.0 - t) * z[j];
        steps.push(TStep { t, j, k, from: z, to: next.clone() });
        z = next;
    }
    let residual = z.iter().zip(x).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    if residual > 1e-9 {
        return Err(Error::MalformedProtocol(format!("majorization chain did not converge (residual {residual:e})")));
    }
    Ok(steps)
}

fn swap_matrix(d: usize, j: usize, k: usize) -> CMatrix {
    let mut p = CMatrix::identity(d, d);
    p[(j, j)] = r(0.0);
    p[(k, k)] = r(0.0);
    p[(j, k)] = ONE;
    p[(k, j)] = ONE;
    p
}

fn in_basis(basis: &CMatrix, m: &CMatrix) -> CMatrix {
    basis * m * basis.adjoint()
}

struct Frames {
    dims: (usize, usize),
    alice: CMatrix,
    bob: CMatrix,
}

/// Two-outcome Alice measurement undoing `step`, with the Bob half of the swap
/// on the second outcome.
fn step_node(step: &TStep, frames: &Frames, next: Node) -> Node {
    let (da, db) = frames.dims;
    let mut first = CMatrix::zeros(da, da);
    let mut second = CMatrix::zeros(da, da);
    let mut swapped = step.from.clone();
    swapped.swap(step.j, step.k);
    for i in 0..da {
        let (m1, m2) = match step.to.get(i) {
            Some(&den) if den > 0.0 => {
                ((step.t * step.from[i] / den).sqrt(), ((1.0 - step.t) * swapped[i] / den).sqrt())
            }
            _ => (step.t.sqrt(), (1.0 - step.t).sqrt()),
        };
        first[(i, i)] = r(m1);
        second[(i, i)] = r(m2);
    }
    let swap_a = swap_matrix(da, step.j, step.k);
    let swap_b = swap_matrix(db, step.j, step.k);
    let a1 = in_basis(&frames.alice, &first);
    let a2 = in_basis(&frames.alice, &(swap_a * second));
    let bob_fix = Node::Measure {
        party: Party::B,
        branches: vec![Branch {
            kraus: ProductKraus::local(Party::B, in_basis(&frames.bob, &swap_b), frames.dims),
            child: next.clone(),
        }],
    };
    Node::Measure {
        party: Party::A,
        branches: vec![
            Branch { kraus: ProductKraus::local(Party::A, a1, frames.dims), child: next },
            Branch { kraus: ProductKraus::local(Party::A, a2, frames.dims), child: bob_fix },
        ],
    }
}

fn local_unitary_node(dims: (usize, usize), ua: CMatrix, ub: CMatrix, leaf: Node) -> Node {
    let mut node = leaf;
    if identity_defect(&ub) > 1e-12 {
        node = Node::Measure {
            party: Party::B,
            branches: vec![Branch { kraus: ProductKraus::local(Party::B, ub, dims), child: node }],
        };
    }
    if identity_defect(&ua) > 1e-12 {
        node = Node::Measure {
            party: Party::A,
            branches: vec![Branch { kraus: ProductKraus::local(Party::A, ua, dims), child: node }],
        };
    }
    node
}

fn nielsen_node(input: &BipartitePureState, output: &BipartitePureState, leaf: Node) -> Result<Node> {
    if input.dims() != output.dims() {
        return Err(Error::DimensionMismatch {
            expected: format!("{}x{}", input.dim_a(), input.dim_b()),
            found: format!("{}x{}", output.dim_a(), output.dim_b()),
        });
    }
    let verdict = majorization_check(input, output);
    if let Some(l) = verdict.first_violating_l {
        return Err(Error::MajorizationFails { l });
    }
    let dims = input.dims();
    let d = dims.0.min(dims.1);
    let source = schmidt_decompose(input, SCHMIDT_TOL)?;
    let target = schmidt_decompose(output, SCHMIDT_TOL)?;
    let padded = |p: Vec<f64>| {
        let mut p = p;
        p.resize(d, 0.0);
        p
    };
    let x = padded(source.probabilities());
    let y = padded(target.probabilities());

    let frames = Frames {
        dims,
        alice: complete_basis(&source.left_vectors, dims.0),
        bob: complete_basis(&source.right_vectors, dims.1),
    };
    let target_alice = complete_basis(&target.left_vectors, dims.0);
    let target_bob = complete_basis(&target.right_vectors, dims.1);
    let ua = &target_alice * frames.alice.adjoint();
    let ub = &target_bob * frames.bob.adjoint();

    let steps = t_transform_chain(&x, &y)?;
    // undo z_K -> z_{K-1} first
    let mut node = local_unitary_node(dims, ua, ub, leaf);
    for step in &steps {
        node = step_node(step, &frames, node);
    }
    Ok(node)
}

/// Deterministic LOCC protocol taking `input` to `output`, or
/// [`Error::MajorizationFails`] when no such protocol exists.
pub fn synthesize_nielsen_protocol(input: &BipartitePureState, output: &BipartitePureState) -> Result<Protocol> {
    let root = nielsen_node(input, output, Node::leaf())?;
    Protocol::new(input.dims(), root)
}

fn check_partition(partition: &[Vec<usize>], d: usize) -> Result<()> {
    let mut seen = vec![false; d];
    for (b, block) in partition.iter().enumerate() {
        if block.is_empty() {
            return Err(Error::InvalidPartition(format!("block {b} is empty")));
        }
        for &i in block {
            if i >= d {
                return Err(Error::InvalidPartition(format!("index {i} exceeds local dimension {d}")));
            }
            if std::mem::replace(&mut seen[i], true) {
                return Err(Error::InvalidPartition(format!("index {i} appears twice")));
            }
        }
    }
    if let Some(i) = seen.iter().position(|s| !s) {
        return Err(Error::InvalidPartition(format!("index {i} is not covered")));
    }
    Ok(())
}

fn block_projector(d: usize, block: &[usize]) -> CMatrix {
    let mut p = CMatrix::zeros(d, d);
    for &i in block {
        p[(i, i)] = ONE;
    }
    p
}

/// One party projects onto the spans of the computational-basis blocks.
pub fn subspace_split_protocol(dims: (usize, usize), party: Party, partition: &[Vec<usize>]) -> Result<Protocol> {
    let d = match party {
        Party::A => dims.0,
        Party::B => dims.1,
    };
    check_partition(partition, d)?;
    let branches = partition
        .iter()
        .enumerate()
        .map(|(b, block)| Branch {
            kraus: ProductKraus::local(party, block_projector(d, block), dims),
            child: Node::labeled(format!("block {b}")),
        })
        .collect();
    Protocol::new(dims, Node::Measure { party, branches })
}

/// Identify-and-prepare: Alice projects onto the blocks of `partition`,
/// which must leave each input intact and tell the inputs apart, then the
/// identified input is converted deterministically to its output.
pub fn build_ip_protocol(pair: &SetPair, partition: &[Vec<usize>]) -> Result<Protocol> {
    build_ip_protocol_for(pair.inputs(), pair.outputs(), partition)
}

/// [`build_ip_protocol`] on plain slices; also accepts a single input.
pub fn build_ip_protocol_for(
    inputs: &[BipartitePureState],
    outputs: &[BipartitePureState],
    partition: &[Vec<usize>],
) -> Result<Protocol> {
    if inputs.is_empty() || inputs.len() != outputs.len() {
        return Err(Error::InvalidPair(format!("{} inputs and {} outputs", inputs.len(), outputs.len())));
    }
    let dims = inputs[0].dims();
    check_partition(partition, dims.0)?;

    let mut owner: Vec<Option<usize>> = vec![None; partition.len()];
    let mut assigned = Vec::with_capacity(inputs.len());
    for (idx, state) in inputs.iter().enumerate() {
        if state.dims() != dims {
            return Err(Error::InvalidPair(format!("input {} has different dimensions", idx + 1)));
        }
        let block = partition.iter().position(|block| {
            let outside: f64 = (0..dims.0)
                .filter(|i| !block.contains(i))
                .flat_map(|i| (0..dims.1).map(move |j| (i, j)))
                .map(|(i, j)| state.amplitude(i, j).norm_sqr())
                .sum();
            outside <= SUPPORT_EPS
        });
        let block = block.ok_or_else(|| {
            Error::InvalidPartition(format!("input {} is not supported inside a single block", idx + 1))
        })?;
        assigned.push(block);
    }
    for (input, output) in inputs.iter().zip(outputs) {
        if let Some(l) = majorization_check(input, output).first_violating_l {
            return Err(Error::MajorizationFails { l });
        }
    }
    for (idx, &block) in assigned.iter().enumerate() {
        if let Some(other) = owner[block] {
            return Err(Error::InvalidPartition(format!(
                "inputs {} and {} share block {block}; the measurement cannot identify them",
                other + 1,
                idx + 1
            )));
        }
        owner[block] = Some(idx);
    }

    if partition.len() == 1 {
        return synthesize_nielsen_protocol(&inputs[0], &outputs[0]);
    }
    let mut branches = Vec::with_capacity(partition.len());
    for (b, block) in partition.iter().enumerate() {
        let child = match owner[b] {
            Some(i) => nielsen_node(&inputs[i], &outputs[i], Node::labeled(format!("input {}", i + 1)))?,
            None => Node::labeled(format!("block {b} (no input)")),
        };
        branches.push(Branch { kraus: ProductKraus::local(Party::A, block_projector(dims.0, block), dims), child });
    }
    Protocol::new(dims, Node::Measure { party: Party::A, branches })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocols::{apply_protocol, validate_protocol, verify_transformation};
    use crate::qstate::linalg::C64;

    const H: f64 = std::f64::consts::FRAC_1_SQRT_2;

    fn st(d: usize, terms: &[(usize, usize, f64)]) -> BipartitePureState {
        let terms: Vec<(usize, usize, C64)> = terms.iter().map(|&(i, j, a)| (i, j, r(a))).collect();
        BipartitePureState::from_terms(d, d, &terms).unwrap()
    }

    fn assert_converts(input: &BipartitePureState, output: &BipartitePureState) -> Protocol {
        let p = synthesize_nielsen_protocol(input, output).unwrap();
        let v = validate_protocol(&p);
        assert!(v.valid, "defect {}", v.max_defect);
        let report = verify_transformation(&p, std::slice::from_ref(input), std::slice::from_ref(output), 1e-7).unwrap();
        assert!(report.verified, "{report:?}");
        p
    }

    #[test]
    fn bell_to_partially_entangled() {
        let alpha = 0.8f64.sqrt();
        let beta = 0.2f64.sqrt();
        assert_converts(&st(2, &[(0, 0, H), (1, 1, H)]), &st(2, &[(0, 0, alpha), (1, 1, beta)]));
        assert_converts(&st(2, &[(0, 0, H), (1, 1, -H)]), &st(2, &[(0, 0, beta), (1, 1, -alpha)]));
    }

    #[test]
    fn same_state_gives_identity() {
        let psi = st(2, &[(0, 0, 0.6), (1, 1, 0.8)]);
        let p = assert_converts(&psi, &psi);
        assert_eq!(p.depth(), 0);
    }

    #[test]
    fn bell_to_product() {
        assert_converts(&st(2, &[(0, 0, H), (1, 1, H)]), &st(2, &[(0, 0, 1.0)]));
        assert_converts(&st(3, &[(0, 0, 0.6), (1, 1, 0.0), (2, 2, 0.8)]), &st(3, &[(1, 2, 1.0)]));
    }

    #[test]
    fn three_level_chain() {
        let third = (1.0f64 / 3.0).sqrt();
        let input = st(3, &[(0, 0, third), (1, 1, third), (2, 2, third)]);
        let output = st(3, &[(0, 1, 0.5f64.sqrt()), (1, 2, 0.3f64.sqrt()), (2, 0, 0.2f64.sqrt())]);
        assert_converts(&input, &output);
    }

    #[test]
    fn majorization_failure_is_reported() {
        let output = st(3, &[(0, 0, 0.8f64.sqrt()), (1, 1, 0.1f64.sqrt()), (2, 2, 0.1f64.sqrt())]);
        let input = st(3, &[(0, 0, H), (1, 1, H)]);
        assert!(matches!(synthesize_nielsen_protocol(&input, &output), Err(Error::MajorizationFails { l: 2 })));
    }

    #[test]
    fn ip_protocol_on_split_supports() {
        let inputs = vec![st(4, &[(0, 0, H), (1, 1, H)]), st(4, &[(2, 2, H), (3, 3, H)])];
        let outputs = vec![st(4, &[(0, 0, 0.8f64.sqrt()), (1, 1, 0.2f64.sqrt())]), st(4, &[(2, 2, 1.0)])];
        let p = build_ip_protocol_for(&inputs, &outputs, &[vec![0, 1], vec![2, 3]]).unwrap();
        assert!(validate_protocol(&p).valid);
        assert!(verify_transformation(&p, &inputs, &outputs, 1e-7).unwrap().verified);

        let err = build_ip_protocol_for(&inputs, &outputs, &[vec![0, 2], vec![1, 3]]).unwrap_err();
        assert!(matches!(err, Error::InvalidPartition(_)));
        assert!(build_ip_protocol_for(&inputs, &outputs, &[vec![0, 1], vec![2]]).is_err());
    }

    #[test]
    fn single_block_ip_is_the_conversion_protocol() {
        let input = st(2, &[(0, 0, H), (1, 1, H)]);
        let output = st(2, &[(0, 0, 0.8f64.sqrt()), (1, 1, 0.2f64.sqrt())]);
        let ip = build_ip_protocol_for(std::slice::from_ref(&input), std::slice::from_ref(&output), &[vec![0, 1]]).unwrap();
        assert_eq!(ip, synthesize_nielsen_protocol(&input, &output).unwrap());
    }

    #[test]
    fn subspace_split_keeps_block_states() {
        let psi = st(4, &[(0, 0, H), (1, 1, H)]);
        let p = subspace_split_protocol((4, 4), Party::A, &[vec![0, 1], vec![2, 3]]).unwrap();
        let outcomes = apply_protocol(&p, &psi).unwrap();
        assert_eq!(outcomes.len(), 1);
        assert!((outcomes[0].probability - 1.0).abs() < 1e-12);
        assert_eq!(outcomes[0].label.as_deref(), Some("block 0"));
    }
}
