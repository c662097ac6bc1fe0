//! Finite-round LOCC protocols as trees of local measurements.
//!
//! Every internal node is a measurement by one party. Each branch carries a
//! product Kraus operator whose factor on the other party is the identity;
//! following a branch means the outcome was announced and the protocol
//! continues in the child. Leaves end the protocol.

mod nielsen;
mod obstruction;

pub use nielsen::{build_ip_protocol, build_ip_protocol_for, subspace_split_protocol, synthesize_nielsen_protocol};
pub use obstruction::{product_kraus_feasibility, FeasibilityVerdict, KrausWitness, RatioSet};

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::codec::{matrix_from_json, matrix_to_json, schema};
use crate::conditions::SetPair;
use crate::error::{Error, Result};
use crate::qstate::linalg::{identity_defect, CMatrix};
use crate::qstate::{fidelity_pure, BipartitePureState, DensityOperator};

/// Branches whose probability falls below this are dropped.
pub const PRUNE_PROBABILITY: f64 = 1e-12;
/// Completeness tolerance on `sum_k K_k^† K_k`.
pub const COMPLETENESS_TOL: f64 = 1e-8;
const IDENTITY_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Party {
    A,
    B,
}

impl Party {
    pub fn as_str(self) -> &'static str {
        match self {
            Party::A => "A",
            Party::B => "B",
        }
    }
}

/// `a_op ⊗ b_op`.
#[derive(Clone, Debug, PartialEq)]
pub struct ProductKraus {
    pub a_op: CMatrix,
    pub b_op: CMatrix,
}

impl ProductKraus {
    pub fn new(a_op: CMatrix, b_op: CMatrix) -> Self {
        Self { a_op, b_op }
    }

    /// `op` on `party`, identity on the other side.
    pub fn local(party: Party, op: CMatrix, dims: (usize, usize)) -> Self {
        match party {
            Party::A => Self { a_op: op, b_op: CMatrix::identity(dims.1, dims.1) },
            Party::B => Self { a_op: CMatrix::identity(dims.0, dims.0), b_op: op },
        }
    }

    pub fn identity(dims: (usize, usize)) -> Self {
        Self::local(Party::A, CMatrix::identity(dims.0, dims.0), dims)
    }

    pub fn acting_op(&self, party: Party) -> &CMatrix {
        match party {
            Party::A => &self.a_op,
            Party::B => &self.b_op,
        }
    }

    pub fn apply(&self, state: &BipartitePureState) -> Result<crate::qstate::linalg::CVector> {
        state.apply_product(&self.a_op, &self.b_op)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Branch {
    pub kraus: ProductKraus,
    pub child: Node,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Node {
    Measure { party: Party, branches: Vec<Branch> },
    Leaf { label: Option<String> },
}

impl Node {
    pub fn leaf() -> Self {
        Node::Leaf { label: None }
    }

    pub fn labeled(label: impl Into<String>) -> Self {
        Node::Leaf { label: Some(label.into()) }
    }

    fn depth(&self) -> usize {
        match self {
            Node::Leaf { .. } => 0,
            Node::Measure { branches, .. } => 1 + branches.iter().map(|b| b.child.depth()).max().unwrap_or(0),
        }
    }

    fn leaves(&self) -> usize {
        match self {
            Node::Leaf { .. } => 1,
            Node::Measure { branches, .. } => branches.iter().map(|b| b.child.leaves()).sum(),
        }
    }
}

/// Protocol on a `dim_a x dim_b` system. Construction checks the tree shape;
/// completeness is checked by [`validate_protocol`].
#[derive(Clone, Debug, PartialEq)]
pub struct Protocol {
    dims: (usize, usize),
    root: Node,
}

impl Protocol {
    pub fn new(dims: (usize, usize), root: Node) -> Result<Self> {
        if dims.0 == 0 || dims.1 == 0 {
            return Err(Error::InvalidDimensions(format!("{}x{}", dims.0, dims.1)));
        }
        check_shape(&root, dims, &mut Vec::new())?;
        Ok(Self { dims, root })
    }

    /// The empty protocol: do nothing.
    pub fn identity(dims: (usize, usize)) -> Self {
        Self { dims, root: Node::leaf() }
    }

    /// `u ⊗ v` applied as two one-branch rounds.
    pub fn local_unitary(u: CMatrix, v: CMatrix) -> Result<Self> {
        let dims = (u.nrows(), v.nrows());
        let bob = Node::Measure {
            party: Party::B,
            branches: vec![Branch { kraus: ProductKraus::local(Party::B, v, dims), child: Node::leaf() }],
        };
        let root = Node::Measure {
            party: Party::A,
            branches: vec![Branch { kraus: ProductKraus::local(Party::A, u, dims), child: bob }],
        };
        Self::new(dims, root)
    }

    /// One party measures in its computational basis.
    pub fn computational_measurement(dims: (usize, usize), party: Party) -> Self {
        let d = match party {
            Party::A => dims.0,
            Party::B => dims.1,
        };
        let branches = (0..d)
            .map(|k| {
                let mut p = CMatrix::zeros(d, d);
                p[(k, k)] = crate::qstate::linalg::ONE;
                Branch { kraus: ProductKraus::local(party, p, dims), child: Node::labeled(format!("{}{k}", party.as_str())) }
            })
            .collect();
        Self { dims, root: Node::Measure { party, branches } }
    }

    pub fn dims(&self) -> (usize, usize) {
        self.dims
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    pub fn depth(&self) -> usize {
        self.root.depth()
    }

    pub fn leaf_count(&self) -> usize {
        self.root.leaves()
    }
}

fn path_string(path: &[usize]) -> String {
    if path.is_empty() {
        "root".into()
    } else {
        let parts: Vec<String> = path.iter().map(usize::to_string).collect();
        format!("root/{}", parts.join("/"))
    }
}

fn check_shape(node: &Node, dims: (usize, usize), path: &mut Vec<usize>) -> Result<()> {
    let Node::Measure { party, branches } = node else {
        return Ok(());
    };
    if branches.is_empty() {
        return Err(Error::MalformedProtocol(format!("{}: measurement without branches", path_string(path))));
    }
    for (k, branch) in branches.iter().enumerate() {
        path.push(k);
        let where_ = path_string(path);
        let ProductKraus { a_op, b_op } = &branch.kraus;
        if a_op.shape() != (dims.0, dims.0) || b_op.shape() != (dims.1, dims.1) {
            return Err(Error::MalformedProtocol(format!(
                "{where_}: operators {:?} and {:?} do not fit a {}x{} system",
                a_op.shape(),
                b_op.shape(),
                dims.0,
                dims.1
            )));
        }
        let idle = match party {
            Party::A => b_op,
            Party::B => a_op,
        };
        if identity_defect(idle) > IDENTITY_TOL {
            return Err(Error::MalformedProtocol(format!(
                "{where_}: party {} measures but the other party's operator is not the identity",
                party.as_str()
            )));
        }
        check_shape(&branch.child, dims, path)?;
        path.pop();
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NodeDefect {
    /// Branch indices from the root.
    pub path: Vec<usize>,
    pub party: Party,
    /// Frobenius norm of `sum_k K_k^† K_k - I` on the acting party.
    pub defect: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProtocolValidation {
    pub valid: bool,
    pub max_defect: f64,
    pub nodes: Vec<NodeDefect>,
}

/// Completeness at every measurement node.
pub fn validate_protocol(protocol: &Protocol) -> ProtocolValidation {
    fn walk(node: &Node, path: &mut Vec<usize>, out: &mut Vec<NodeDefect>) {
        if let Node::Measure { party, branches } = node {
            let d = branches[0].kraus.acting_op(*party).nrows();
            let sum = branches.iter().fold(CMatrix::zeros(d, d), |acc, b| {
                let k = b.kraus.acting_op(*party);
                acc + k.adjoint() * k
            });
            out.push(NodeDefect { path: path.clone(), party: *party, defect: identity_defect(&sum) });
            for (k, branch) in branches.iter().enumerate() {
                path.push(k);
                walk(&branch.child, path, out);
                path.pop();
            }
        }
    }
    let mut nodes = Vec::new();
    walk(&protocol.root, &mut Vec::new(), &mut nodes);
    let max_defect = nodes.iter().map(|n| n.defect).fold(0.0, f64::max);
    ProtocolValidation { valid: max_defect <= COMPLETENESS_TOL, max_defect, nodes }
}

#[derive(Clone, Debug)]
pub struct BranchOutcome {
    pub probability: f64,
    pub post_state: BipartitePureState,
    pub path: Vec<usize>,
    pub label: Option<String>,
}

/// Depth-first run on a pure input. Outcomes below [`PRUNE_PROBABILITY`] are
/// dropped; surviving post-measurement states are renormalized.
pub fn apply_protocol(protocol: &Protocol, state: &BipartitePureState) -> Result<Vec<BranchOutcome>> {
    if state.dims() != protocol.dims {
        return Err(Error::DimensionMismatch {
            expected: format!("{}x{}", protocol.dims.0, protocol.dims.1),
            found: format!("{}x{}", state.dim_a(), state.dim_b()),
        });
    }
    fn walk(
        node: &Node,
        state: BipartitePureState,
        probability: f64,
        path: &mut Vec<usize>,
        out: &mut Vec<BranchOutcome>,
    ) -> Result<()> {
        match node {
            Node::Leaf { label } => {
                out.push(BranchOutcome { probability, post_state: state, path: path.clone(), label: label.clone() });
            }
            Node::Measure { branches, .. } => {
                for (k, branch) in branches.iter().enumerate() {
                    let v = branch.kraus.apply(&state)?;
                    let weight = v.norm_squared();
                    let p = probability * weight;
                    if p < PRUNE_PROBABILITY {
                        continue;
                    }
                    let next = BipartitePureState::normalized(state.dim_a(), state.dim_b(), v.iter().copied().collect())?;
                    path.push(k);
                    walk(&branch.child, next, p, path, out)?;
                    path.pop();
                }
            }
        }
        Ok(())
    }
    let mut out = Vec::new();
    walk(&protocol.root, state.clone(), 1.0, &mut Vec::new(), &mut out)?;
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct MixedOutcome {
    pub probability: f64,
    pub state: DensityOperator,
    pub path: Vec<usize>,
    pub label: Option<String>,
}

/// Leaf path, label, and the weighted post-measurement states reaching it.
type LeafGroup = (Vec<usize>, Option<String>, Vec<f64>, Vec<BipartitePureState>);

/// Run on the ensemble `{(p_i, psi_i)}`: each leaf carries its total
/// probability and the normalized mixture of the states that reach it.
pub fn apply_protocol_mixed(
    protocol: &Protocol,
    probs: &[f64],
    states: &[BipartitePureState],
) -> Result<Vec<MixedOutcome>> {
    if probs.len() != states.len() {
        return Err(Error::DimensionMismatch { expected: format!("{} weights", states.len()), found: probs.len().to_string() });
    }
    let mut grouped: Vec<LeafGroup> = Vec::new();
    for (&p, state) in probs.iter().zip(states) {
        for outcome in apply_protocol(protocol, state)? {
            let weight = p * outcome.probability;
            match grouped.iter_mut().find(|g| g.0 == outcome.path) {
                Some(g) => {
                    g.2.push(weight);
                    g.3.push(outcome.post_state);
                }
                None => grouped.push((outcome.path, outcome.label, vec![weight], vec![outcome.post_state])),
            }
        }
    }
    grouped.sort_by(|a, b| a.0.cmp(&b.0));
    grouped
        .into_iter()
        .map(|(path, label, weights, members)| {
            let total: f64 = weights.iter().sum();
            let normalized: Vec<f64> = weights.iter().map(|w| w / total).collect();
            let state = crate::qstate::mixture(&normalized, &members);
            Ok(MixedOutcome { probability: total, state, path, label })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InputCheck {
    pub index: usize,
    pub total_probability: f64,
    pub worst_fidelity: f64,
    pub ok: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransformationReport {
    pub verified: bool,
    pub inputs: Vec<InputCheck>,
    pub note: Option<String>,
}

/// Each input must reach its own output on every surviving leaf.
pub fn verify_transformation(
    protocol: &Protocol,
    inputs: &[BipartitePureState],
    outputs: &[BipartitePureState],
    tol: f64,
) -> Result<TransformationReport> {
    if inputs.len() != outputs.len() {
        return Err(Error::InvalidPair(format!("{} inputs but {} outputs", inputs.len(), outputs.len())));
    }
    if let Some(out) = outputs.iter().find(|o| o.dims() != protocol.dims) {
        return Ok(TransformationReport {
            verified: false,
            inputs: Vec::new(),
            note: Some(format!(
                "outputs live in {}x{} but the protocol keeps {}x{}",
                out.dim_a(),
                out.dim_b(),
                protocol.dims.0,
                protocol.dims.1
            )),
        });
    }
    let mut checks = Vec::with_capacity(inputs.len());
    for (index, (input, output)) in inputs.iter().zip(outputs).enumerate() {
        let outcomes = apply_protocol(protocol, input)?;
        let total_probability: f64 = outcomes.iter().map(|o| o.probability).sum();
        let worst_fidelity = outcomes
            .iter()
            .map(|o| fidelity_pure(&o.post_state, output))
            .collect::<Result<Vec<f64>>>()?
            .into_iter()
            .fold(1.0, f64::min);
        let ok = (total_probability - 1.0).abs() <= tol && worst_fidelity >= 1.0 - tol;
        checks.push(InputCheck { index, total_probability, worst_fidelity, ok });
    }
    Ok(TransformationReport { verified: checks.iter().all(|c| c.ok), inputs: checks, note: None })
}

/// True iff the protocol maps every input of the pair to its output with certainty.
pub fn verify_set_transformation(protocol: &Protocol, pair: &SetPair, tol: f64) -> bool {
    verify_transformation(protocol, pair.inputs(), pair.outputs(), tol).is_ok_and(|r| r.verified)
}

impl Protocol {
    /// `{"dims": [dA, dB], "root": node}` where a node is either
    /// `{"party", "branches": [{"a_op", "b_op"}], "children": [node | null]}`
    /// or a leaf `{"label": ..}` / `null`.
    pub fn to_json(&self) -> Value {
        fn node(n: &Node) -> Value {
            match n {
                Node::Leaf { label: None } => Value::Null,
                Node::Leaf { label: Some(l) } => json!({ "label": l }),
                Node::Measure { party, branches } => json!({
                    "party": party.as_str(),
                    "branches": branches
                        .iter()
                        .map(|b| json!({ "a_op": matrix_to_json(&b.kraus.a_op), "b_op": matrix_to_json(&b.kraus.b_op) }))
                        .collect::<Vec<_>>(),
                    "children": branches.iter().map(|b| node(&b.child)).collect::<Vec<_>>(),
                }),
            }
        }
        json!({ "dims": [self.dims.0, self.dims.1], "root": node(&self.root) })
    }

    pub fn from_json(value: &Value) -> Result<Self> {
        let obj = value.as_object().ok_or_else(|| schema("$", "protocol must be an object"))?;
        let dims = obj
            .get("dims")
            .and_then(Value::as_array)
            .filter(|d| d.len() == 2)
            .and_then(|d| Some((d[0].as_u64()? as usize, d[1].as_u64()? as usize)))
            .ok_or_else(|| schema("$.dims", "expected [dim_a, dim_b]"))?;
        let root = parse_node(obj.get("root").unwrap_or(&Value::Null), "$.root", dims)?;
        Self::new(dims, root)
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let value: Value = serde_json::from_str(text)
            .map_err(|e| schema(format!("line {} column {}", e.line(), e.column()), e.to_string()))?;
        Self::from_json(&value)
    }
}

fn parse_node(value: &Value, path: &str, dims: (usize, usize)) -> Result<Node> {
    let obj: &Map<String, Value> = match value {
        Value::Null => return Ok(Node::leaf()),
        Value::Object(obj) => obj,
        other => return Err(schema(path, format!("expected a node object or null, found {other}"))),
    };
    if !obj.contains_key("party") {
        let label = match obj.get("label") {
            None | Some(Value::Null) => None,
            Some(Value::String(s)) => Some(s.clone()),
            Some(other) => return Err(schema(format!("{path}.label"), format!("expected a string, found {other}"))),
        };
        return Ok(Node::Leaf { label });
    }
    let party = match obj.get("party").and_then(Value::as_str) {
        Some("A") => Party::A,
        Some("B") => Party::B,
        _ => return Err(schema(format!("{path}.party"), "expected \"A\" or \"B\"")),
    };
    let raw_branches = obj
        .get("branches")
        .and_then(Value::as_array)
        .ok_or_else(|| schema(format!("{path}.branches"), "expected a list of branches"))?;
    let children = match obj.get("children") {
        None | Some(Value::Null) => Vec::new(),
        Some(Value::Array(c)) => c.clone(),
        Some(_) => return Err(schema(format!("{path}.children"), "expected a list")),
    };
    if children.len() > raw_branches.len() {
        return Err(schema(
            format!("{path}.children"),
            format!("{} children for {} branches", children.len(), raw_branches.len()),
        ));
    }
    let mut branches = Vec::with_capacity(raw_branches.len());
    for (k, raw) in raw_branches.iter().enumerate() {
        let bpath = format!("{path}.branches[{k}]");
        let op = |key: &str, d: usize| -> Result<CMatrix> {
            match raw.get(key) {
                None | Some(Value::Null) => Ok(CMatrix::identity(d, d)),
                Some(m) => matrix_from_json(m, &format!("{bpath}.{key}")),
            }
        };
        let kraus = ProductKraus::new(op("a_op", dims.0)?, op("b_op", dims.1)?);
        let child = match children.get(k) {
            Some(c) => parse_node(c, &format!("{path}.children[{k}]"), dims)?,
            None => Node::leaf(),
        };
        branches.push(Branch { kraus, child });
    }
    Ok(Node::Measure { party, branches })
}
