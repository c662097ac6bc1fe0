//! Necessary conditions for a deterministic LOCC transformation between two
//! sets of pure states, pairwise fidelity baselines, and the region label
//! built from the three verdicts.
//!
//! (a) every pair `psi_i -> phi_i` passes the majorization test;
//! (b) for every interior distribution `p`, entanglement of the mixture of
//!     inputs is at least that of the mixture of outputs;
//! (c) the inputs are at least as distinguishable as the outputs.
//!
//! (b) quantifies over all `p` and all measures. It is approximated by a grid
//! plus seeded random points and the measures negativity, concurrence and
//! entanglement of formation (the last two only for two qubits). A YES from
//! (b) is therefore "YES-sampled" and says so in its justification; only NO
//! verdicts are proofs.

mod simplex;

pub use simplex::{simplex_grid, SamplerConfig, SimplexGrid, SimplexPoint};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distinguishability::locc_distinguishable;
use crate::entanglement::{majorization_check, Measure, NielsenVerdict};
use crate::error::{Error, Result};
use crate::qstate::linalg::{r, CMatrix};
use crate::qstate::{fidelity_mixed, fidelity_pure, mixture, trace_norm, BipartitePureState, DensityOperator, Tolerances};
use crate::verdict::{TriState, Verdict};

const TIE: f64 = 1e-9;

/// Input set and output set of a proposed transformation `psi_i -> phi_i`.
#[derive(Clone, Debug)]
pub struct SetPair {
    inputs: Vec<BipartitePureState>,
    outputs: Vec<BipartitePureState>,
}

impl SetPair {
    pub fn new(inputs: Vec<BipartitePureState>, outputs: Vec<BipartitePureState>) -> Result<Self> {
        if inputs.len() != outputs.len() {
            return Err(Error::InvalidPair(format!("{} inputs but {} outputs", inputs.len(), outputs.len())));
        }
        if inputs.len() < 2 {
            return Err(Error::InvalidPair("need at least two states per side".into()));
        }
        for (side, states) in [("input", &inputs), ("output", &outputs)] {
            if let Some(w) = states.windows(2).find(|w| w[0].dims() != w[1].dims()) {
                return Err(Error::InvalidPair(format!(
                    "{side} states mix dimensions {:?} and {:?}",
                    w[0].dims(),
                    w[1].dims()
                )));
            }
        }
        Ok(Self { inputs, outputs })
    }

    pub fn inputs(&self) -> &[BipartitePureState] {
        &self.inputs
    }

    pub fn outputs(&self) -> &[BipartitePureState] {
        &self.outputs
    }

    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    pub fn input_dims(&self) -> (usize, usize) {
        self.inputs[0].dims()
    }

    pub fn output_dims(&self) -> (usize, usize) {
        self.outputs[0].dims()
    }

    /// `sum_i p_i |psi_i><psi_i|`.
    pub fn input_density(&self, probs: &[f64]) -> Result<DensityOperator> {
        self.check_probs(probs)?;
        Ok(mixture(probs, &self.inputs))
    }

    /// `sum_i p_i |phi_i><phi_i|`.
    pub fn output_density(&self, probs: &[f64]) -> Result<DensityOperator> {
        self.check_probs(probs)?;
        Ok(mixture(probs, &self.outputs))
    }

    fn check_probs(&self, probs: &[f64]) -> Result<()> {
        if probs.len() != self.len() {
            return Err(Error::DimensionMismatch {
                expected: format!("{} weights", self.len()),
                found: format!("{}", probs.len()),
            });
        }
        Ok(())
    }
}

/// Pair `(i, j)` (0-based) with the smallest `F_out - F_in`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FidelityWitness {
    pub i: usize,
    pub j: usize,
    pub f_in: f64,
    pub f_out: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lemma1Report {
    pub verdict: TriState,
    pub worst: FidelityWitness,
}

/// Pairwise fidelities may not decrease: `F(phi_i, phi_j) >= F(psi_i, psi_j)`.
pub fn lemma1_check(pair: &SetPair) -> Lemma1Report {
    let n = pair.len();
    let mut worst: Option<FidelityWitness> = None;
    for i in 0..n {
        for j in i + 1..n {
            let f_in = fidelity_pure(&pair.inputs[i], &pair.inputs[j]).expect("common dims");
            let f_out = fidelity_pure(&pair.outputs[i], &pair.outputs[j]).expect("common dims");
            if worst.as_ref().is_none_or(|w| f_out - f_in < w.f_out - w.f_in) {
                worst = Some(FidelityWitness { i, j, f_in, f_out });
            }
        }
    }
    let worst = worst.expect("at least two states");
    let detail = format!(
        "pair ({}, {}): F_in = {:.6}, F_out = {:.6}",
        worst.i + 1,
        worst.j + 1,
        worst.f_in,
        worst.f_out
    );
    let verdict = if worst.f_out < worst.f_in - TIE {
        TriState::no("fidelity", format!("output fidelity drops below input fidelity at {detail}"))
    } else {
        TriState::yes("fidelity", format!("no pairwise fidelity decreases; tightest {detail}"))
    };
    Lemma1Report { verdict, worst }
}

/// Whether some quantum operation (not necessarily local) maps two pure
/// inputs onto two given outputs: exactly when `F(sigma_1, sigma_2) >= F(psi_1, psi_2)`.
pub fn lemma2_pair_feasible(inputs: [&BipartitePureState; 2], outputs: [&DensityOperator; 2]) -> Result<bool> {
    let f_in = fidelity_pure(inputs[0], inputs[1])?;
    let f_out = fidelity_mixed(outputs[0], outputs[1])?;
    Ok(f_out >= f_in - TIE)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lemma3Report {
    pub verdict: TriState,
    /// Minimum over the grid of `||p1 rho1 - p2 rho2||_1 - ||p1 sigma1 - p2 sigma2||_1`.
    pub min_margin: f64,
    /// Distribution attaining the minimum margin.
    pub worst_p: [f64; 2],
}

/// Trace-norm test for two single-qubit states: `||p1 sigma1 - p2 sigma2||_1
/// <= ||p1 rho1 - p2 rho2||_1` on `p1 = k / resolution`, `k = 0..=resolution`.
pub fn lemma3_qubit_check(
    inputs: [&DensityOperator; 2],
    outputs: [&DensityOperator; 2],
    resolution: usize,
) -> Result<Lemma3Report> {
    for rho in inputs.iter().chain(outputs.iter()) {
        let (da, db) = rho.dims();
        if da * db != 2 {
            return Err(Error::DimensionMismatch { expected: "single qubit".into(), found: format!("{da}x{db}") });
        }
    }
    if resolution == 0 {
        return Err(Error::InvalidDistribution("grid resolution must be positive".into()));
    }
    let mut min_margin = f64::INFINITY;
    let mut worst_p = [0.0, 1.0];
    for k in 0..=resolution {
        let p1 = k as f64 / resolution as f64;
        let p2 = 1.0 - p1;
        let rhs = trace_norm(&(inputs[0].matrix() * r(p1) - inputs[1].matrix() * r(p2)));
        let lhs = trace_norm(&(outputs[0].matrix() * r(p1) - outputs[1].matrix() * r(p2)));
        if rhs - lhs < min_margin {
            min_margin = rhs - lhs;
            worst_p = [p1, p2];
        }
    }
    let verdict = if min_margin < -TIE {
        TriState::no(
            "trace-norm",
            format!("output trace distance exceeds input by {:.6} at p = ({:.4}, {:.4})", -min_margin, worst_p[0], worst_p[1]),
        )
    } else {
        TriState::yes(
            "trace-norm",
            format!("YES-sampled: holds on {} grid points, min margin {min_margin:.3e}", resolution + 1),
        )
    };
    Ok(Lemma3Report { verdict, min_margin, worst_p })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionA {
    pub verdict: TriState,
    pub pairs: Vec<NielsenVerdict>,
    /// 1-based index of the first pair failing majorization.
    pub first_failing: Option<usize>,
}

pub fn condition_a_check(pair: &SetPair) -> ConditionA {
    let pairs: Vec<NielsenVerdict> =
        pair.inputs.iter().zip(&pair.outputs).map(|(a, b)| majorization_check(a, b)).collect();
    let first_failing = pairs.iter().position(|v| !v.holds).map(|i| i + 1);
    let verdict = match first_failing {
        Some(i) => TriState::no(
            "majorization",
            format!(
                "pair {i} fails majorization at partial sum l = {}",
                pairs[i - 1].first_violating_l.expect("failing verdict has an index")
            ),
        ),
        None => TriState::yes("majorization", "every pair satisfies majorization"),
    };
    ConditionA { verdict, pairs, first_failing }
}

/// A sampled distribution at which the input mixture is less entangled than
/// the output mixture.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntanglementWitness {
    pub probs: Vec<f64>,
    pub measure: Measure,
    pub input_value: f64,
    pub output_value: f64,
    /// `separability` when the input mixture is PPT and the output is not.
    pub rule: String,
}

impl EntanglementWitness {
    /// Recomputes both values at the stored distribution and confirms the
    /// strict violation.
    pub fn replay(&self, pair: &SetPair) -> Result<bool> {
        let e_in = self.measure.evaluate(&pair.input_density(&self.probs)?)?.value;
        let e_out = self.measure.evaluate(&pair.output_density(&self.probs)?)?.value;
        Ok(e_in + TIE < e_out)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionB {
    pub verdict: TriState,
    pub witness: Option<EntanglementWitness>,
    /// Smallest `E(rho_psi) - E(rho_phi)` seen over all points and measures.
    pub min_margin: f64,
    pub points: usize,
    pub measures: Vec<Measure>,
}

/// Measures applicable to both the input and the output dimensions.
pub fn shared_measures(pair: &SetPair) -> Vec<Measure> {
    let out = Measure::applicable(pair.output_dims());
    Measure::applicable(pair.input_dims()).into_iter().filter(|m| out.contains(m)).collect()
}

/// `(measure, E(rho_psi,p), E(rho_phi,p))` for every shared measure.
pub fn evaluate_measures(pair: &SetPair, probs: &[f64]) -> Result<Vec<(Measure, f64, f64)>> {
    let rho_in = pair.input_density(probs)?;
    let rho_out = pair.output_density(probs)?;
    shared_measures(pair)
        .into_iter()
        .map(|m| Ok((m, m.evaluate(&rho_in)?.value, m.evaluate(&rho_out)?.value)))
        .collect()
}

fn point_violation(probs: &[f64], values: &[(Measure, f64, f64)]) -> Option<EntanglementWitness> {
    let witness = |&(measure, input_value, output_value): &(Measure, f64, f64), rule: &str| EntanglementWitness {
        probs: probs.to_vec(),
        measure,
        input_value,
        output_value,
        rule: rule.into(),
    };
    let separable = values
        .iter()
        .find(|(m, e_in, e_out)| *m == Measure::Negativity && *e_in <= TIE && *e_out > TIE && e_in + TIE < *e_out);
    if let Some(v) = separable {
        return Some(witness(v, "separability"));
    }
    values.iter().find(|(_, e_in, e_out)| e_in + TIE < *e_out).map(|v| witness(v, "measure"))
}

pub fn condition_b_check(pair: &SetPair, sampler: &SamplerConfig) -> ConditionB {
    let points = sampler.points(pair.len());
    let measures = shared_measures(pair);
    let evaluated: Vec<Vec<(Measure, f64, f64)>> = points
        .par_iter()
        .map(|p| evaluate_measures(pair, p.probs()).expect("pair densities and measures are well formed"))
        .collect();

    let min_margin = evaluated
        .iter()
        .flatten()
        .map(|(_, e_in, e_out)| e_in - e_out)
        .fold(f64::INFINITY, f64::min);
    let witness = points.iter().zip(&evaluated).find_map(|(p, values)| point_violation(p.probs(), values));

    let names: Vec<&str> = measures.iter().map(|m| m.name()).collect();
    let verdict = match &witness {
        Some(w) => TriState::no(
            w.rule.clone(),
            format!(
                "{} of the input mixture {:.6} < output mixture {:.6} at p = {}",
                w.measure.name(),
                w.input_value,
                w.output_value,
                format_probs(&w.probs)
            ),
        ),
        None => TriState::yes(
            "sampled",
            format!(
                "YES-sampled: no violation of [{}] on {} points (grid resolution {}, {} random, seed {}); min margin {min_margin:.3e}",
                names.join(", "),
                points.len(),
                sampler.resolution_for(pair.len()),
                sampler.random_samples,
                sampler.seed
            ),
        ),
    };
    ConditionB { verdict, witness, min_margin, points: points.len(), measures }
}

fn format_probs(probs: &[f64]) -> String {
    let parts: Vec<String> = probs.iter().map(|p| format!("{p:.4}")).collect();
    format!("({})", parts.join(", "))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionC {
    pub verdict: TriState,
    pub lemma1: Lemma1Report,
    pub locc_inputs: TriState,
    pub locc_outputs: TriState,
}

/// Distinguishability may not increase: a fidelity increase among any pair,
/// or a set that becomes locally distinguishable, rules the transformation out.
pub fn condition_c_check(pair: &SetPair) -> ConditionC {
    let lemma1 = lemma1_check(pair);
    let locc_inputs = locc_distinguishable(&pair.inputs);
    let locc_outputs = locc_distinguishable(&pair.outputs);

    let verdict = if lemma1.verdict.is_no() {
        TriState::no("fidelity", lemma1.verdict.justification.clone())
    } else if locc_inputs.is_no() && locc_outputs.is_yes() {
        TriState::no(
            "locc-downgrade",
            format!(
                "outputs are locally distinguishable ({}) but inputs are not ({})",
                locc_outputs.rule, locc_inputs.rule
            ),
        )
    } else if locc_outputs.is_yes() && !locc_inputs.is_yes() {
        TriState::unknown(
            "locc-undecided",
            format!("outputs are locally distinguishable ({}) but the inputs are undecided", locc_outputs.rule),
        )
    } else {
        let how = match (locc_inputs.value, locc_outputs.value) {
            (Verdict::Yes, _) => "inputs are locally distinguishable",
            (_, Verdict::No) => "outputs are not locally distinguishable",
            _ => "no local distinguishability gain is established",
        };
        TriState::yes("distinguishability", format!("pairwise fidelities do not decrease; {how}"))
    };
    ConditionC { verdict, lemma1, locc_inputs, locc_outputs }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub cond_a: ConditionA,
    pub cond_b: ConditionB,
    pub cond_c: ConditionC,
    pub region: String,
}

impl ConditionReport {
    pub fn pattern(&self) -> [Verdict; 3] {
        [self.cond_a.verdict.value, self.cond_b.verdict.value, self.cond_c.verdict.value]
    }

    pub fn all_yes(&self) -> bool {
        self.pattern().iter().all(|v| *v == Verdict::Yes)
    }
}

/// `a ∧ ¬b ∧ c` style label; an undecided coordinate is written `?b`.
pub fn region_label(pattern: [Verdict; 3]) -> String {
    let parts: Vec<String> = ["a", "b", "c"]
        .iter()
        .zip(pattern)
        .map(|(name, v)| match v {
            Verdict::Yes => name.to_string(),
            Verdict::No => format!("¬{name}"),
            Verdict::Unknown => format!("?{name}"),
        })
        .collect();
    parts.join(" ∧ ")
}

pub fn classify_region(pair: &SetPair) -> ConditionReport {
    classify_region_with(pair, &SamplerConfig::default())
}

pub fn classify_region_with(pair: &SetPair, sampler: &SamplerConfig) -> ConditionReport {
    let cond_a = condition_a_check(pair);
    let cond_b = condition_b_check(pair, sampler);
    let cond_c = condition_c_check(pair);
    let region = region_label([cond_a.verdict.value, cond_b.verdict.value, cond_c.verdict.value]);
    ConditionReport { cond_a, cond_b, cond_c, region }
}

/// Density operator on a single qubit, for the trace-norm baseline.
pub fn qubit_density(matrix: CMatrix) -> Result<DensityOperator> {
    DensityOperator::with_tolerance(2, 1, matrix, Tolerances::default().invariant)
}
