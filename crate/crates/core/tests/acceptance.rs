//! Acceptance criteria. Each test prints one `PASS`/`FAIL` line, then asserts.
//! Tolerances are pinned here, next to the check that uses them.

use std::time::{Duration, Instant};

use locc_core::conditions::{
    classify_region, classify_region_with, condition_a_check, SamplerConfig, SetPair,
};
use locc_core::corpus::bundled_corpus;
use locc_core::distinguishability::{class_distinguishable, KnownFactTable, OpClass};
use locc_core::entanglement::{concurrence_2q, majorization_check, negativity};
use locc_core::protocols::{
    apply_protocol, apply_protocol_mixed, product_kraus_feasibility, subspace_split_protocol,
    synthesize_nielsen_protocol, validate_protocol, verify_set_transformation, verify_transformation, Party,
    Protocol,
};
use locc_core::qstate::linalg::{r, trace, CMatrix};
use locc_core::qstate::random::{random_density, random_state, random_unitary};
use locc_core::qstate::{
    fidelity_pure, partial_trace, partial_transpose_matrix, BipartitePureState, DensityOperator,
    Subsystem,
};
use locc_core::verdict::Verdict;
use locc_core::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const H: f64 = std::f64::consts::FRAC_1_SQRT_2;

fn verdict_line(criterion: u32, pass: bool, detail: &str) {
    println!("{} criterion {criterion}: {detail}", if pass { "PASS" } else { "FAIL" });
}

fn state(d_a: usize, d_b: usize, terms: &[(usize, usize, f64)]) -> BipartitePureState {
    let terms: Vec<_> = terms.iter().map(|&(i, j, a)| (i, j, r(a))).collect();
    BipartitePureState::from_terms(d_a, d_b, &terms).unwrap()
}

fn fixture(id: &str) -> SetPair {
    bundled_corpus().into_iter().find(|f| f.id == id).and_then(|f| f.pair().cloned()).unwrap()
}

/// Bell inputs and `alpha|00> + beta|11>`, `beta|00> - alpha|11>` outputs.
fn insufficiency_pair(alpha_sq: f64) -> SetPair {
    let (a, b) = (alpha_sq.sqrt(), (1.0 - alpha_sq).sqrt());
    SetPair::new(
        vec![state(2, 2, &[(0, 0, H), (1, 1, H)]), state(2, 2, &[(0, 0, H), (1, 1, -H)])],
        vec![state(2, 2, &[(0, 0, a), (1, 1, b)]), state(2, 2, &[(0, 0, b), (1, 1, -a)])],
    )
    .unwrap()
}

#[test]
fn criterion_01_majorization_verdicts() {
    const BUDGET: Duration = Duration::from_secs(1);
    // (fixture, condition (a) satisfied, per-pair convertibility from the Schmidt spectra)
    let table: [(&str, bool, &[bool]); 8] = [
        ("prop2-a", true, &[true, true, true]),
        ("prop2-b", false, &[false, true, true, true]),
        ("prop2-c", false, &[false, true]),
        ("prop3-ab", true, &[true, true]),
        ("prop3-ac", true, &[true, true]),
        ("prop3-bc", false, &[false, true]),
        ("prop4", true, &[true, true]),
        ("prop5", true, &[true, true]),
    ];
    let pairs: Vec<(SetPair, bool, &[bool], &str)> =
        table.iter().map(|&(id, sat, per)| (fixture(id), sat, per, id)).collect();
    let start = Instant::now();
    let mut bad = Vec::new();
    for (pair, sat, per, id) in &pairs {
        let got: Vec<bool> =
            pair.inputs().iter().zip(pair.outputs()).map(|(a, b)| majorization_check(a, b).holds).collect();
        let cond_a = condition_a_check(pair).verdict.value == Verdict::Yes;
        if got != *per || cond_a != *sat {
            bad.push(format!("{id}: pairs {got:?}, condition {cond_a}"));
        }
    }
    let elapsed = start.elapsed();
    let pass = bad.is_empty() && elapsed < BUDGET;
    verdict_line(1, pass, &format!("8 fixtures, {elapsed:?} (budget {BUDGET:?}) {bad:?}"));
    assert!(pass);
}

#[test]
fn criterion_02_concurrence_closed_forms() {
    const TOL: f64 = 1e-7;
    let alpha_sq: f64 = 0.8;
    let two_ab = 2.0 * (alpha_sq * (1.0 - alpha_sq)).sqrt();
    let pair = insufficiency_pair(alpha_sq);
    let mut worst: f64 = 0.0;
    for k in 1..=99 {
        let p = k as f64 / 100.0;
        let probs = [p, 1.0 - p];
        let c_in = concurrence_2q(&pair.input_density(&probs).unwrap()).unwrap();
        let c_out = concurrence_2q(&pair.output_density(&probs).unwrap()).unwrap();
        worst = worst.max((c_in - (1.0 - 2.0 * p).abs()).abs());
        worst = worst.max((c_out - two_ab * (1.0 - 2.0 * p).abs()).abs());
    }
    let pass = worst <= TOL;
    verdict_line(2, pass, &format!("99-point grid, max deviation {worst:.3e} (tol {TOL:e})"));
    assert!(pass);
}

#[test]
fn criterion_03_entanglement_onset() {
    const ZERO: f64 = 1e-9;
    const ONSET_TOL: f64 = 1e-3;
    const STEPS: usize = 50_000;
    let pair = fixture("prop2-a");
    let mut onset = None;
    let mut max_input: f64 = 0.0;
    for k in 1..STEPS {
        let p = 0.5 * k as f64 / STEPS as f64;
        let probs = [p, p, 1.0 - 2.0 * p];
        max_input = max_input.max(negativity(&pair.input_density(&probs).unwrap()));
        if onset.is_none() && negativity(&pair.output_density(&probs).unwrap()) > ZERO {
            onset = Some(p);
        }
    }
    let onset = onset.unwrap_or(f64::NAN);
    let pass = (onset - 4.0 / 9.0).abs() <= ONSET_TOL && max_input <= ZERO;
    verdict_line(
        3,
        pass,
        &format!("onset p = {onset:.6} vs 4/9 = {:.6}; max input negativity {max_input:.3e}", 4.0 / 9.0),
    );
    assert!(pass);
}

#[test]
fn criterion_04_region_patterns() {
    use Verdict::{No, Yes};
    let published: [(&str, [Verdict; 3]); 8] = [
        ("prop2-a", [Yes, No, No]),
        ("prop2-b", [No, Yes, No]),
        ("prop2-c", [No, No, Yes]),
        ("prop3-ab", [Yes, Yes, No]),
        ("prop3-ac", [Yes, No, Yes]),
        ("prop3-bc", [No, Yes, Yes]),
        ("prop4", [Yes, Yes, Yes]),
        ("prop5", [Yes, Yes, Yes]),
    ];
    let mut bad = Vec::new();
    for (id, expected) in published {
        let report = classify_region(&fixture(id));
        let got = report.pattern();
        if got != expected {
            let witness = report.cond_b.witness.as_ref().map_or(String::new(), |w| {
                format!(" ({} {:.6} < {:.6} at p = {:?})", w.measure.name(), w.input_value, w.output_value, w.probs)
            });
            bad.push(format!("{id}: got {}{witness}", report.region));
        }
    }
    let pass = bad.is_empty();
    verdict_line(4, pass, &format!("{} of 8 patterns reproduced; mismatches: {bad:?}", 8 - bad.len()));
    assert!(pass, "{bad:#?}");
}

#[test]
fn criterion_05_insufficiency() {
    let mut bad = Vec::new();
    for k in 51..=99 {
        let alpha_sq = k as f64 / 100.0;
        let pair = insufficiency_pair(alpha_sq);
        let all_yes = classify_region(&pair).all_yes();
        let infeasible = matches!(product_kraus_feasibility(&pair), Ok(v) if !v.feasible);
        if !all_yes || !infeasible {
            bad.push(format!("alpha^2 = {alpha_sq}: all_yes {all_yes}, infeasible {infeasible}"));
        }
    }
    let at_half = product_kraus_feasibility(&insufficiency_pair(0.5)).map(|v| v.feasible).unwrap_or(false);
    let pass = bad.is_empty() && at_half;
    verdict_line(5, pass, &format!("49 values INFEASIBLE with all conditions YES; FEASIBLE at 0.5: {at_half}; {bad:?}"));
    assert!(pass);
}

#[test]
fn criterion_06_synthesis_soundness() {
    const TOL: f64 = 1e-7;
    const PER_CLASS: usize = 500;
    const BUDGET: Duration = Duration::from_secs(60);
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let start = Instant::now();
    let (mut holds, mut fails) = (0, 0);
    let mut bad = Vec::new();
    while holds < PER_CLASS || fails < PER_CLASS {
        let (d_a, d_b) = (rng.random_range(2..=4), rng.random_range(2..=4));
        let input = random_state(&mut rng, d_a, d_b);
        let output = random_state(&mut rng, d_a, d_b);
        let verdict = majorization_check(&input, &output);
        if verdict.holds && holds < PER_CLASS {
            holds += 1;
            let ok = synthesize_nielsen_protocol(&input, &output).is_ok_and(|p| {
                validate_protocol(&p).valid
                    && verify_transformation(&p, std::slice::from_ref(&input), std::slice::from_ref(&output), TOL).is_ok_and(|v| v.verified)
            });
            if !ok {
                bad.push(format!("{d_a}x{d_b}: synthesis or verification failed"));
            }
        } else if !verdict.holds && fails < PER_CLASS {
            fails += 1;
            let refused = matches!(synthesize_nielsen_protocol(&input, &output), Err(Error::MajorizationFails { .. }));
            if !refused {
                bad.push(format!("{d_a}x{d_b}: synthesis did not refuse"));
            }
        }
    }
    let elapsed = start.elapsed();
    let pass = bad.is_empty() && elapsed < BUDGET;
    verdict_line(6, pass, &format!("{holds} convertible + {fails} refused in {elapsed:?}; failures {bad:?}"));
    assert!(pass);
}

#[test]
fn criterion_07_bundled_protocol_end_to_end() {
    const PROB_TOL: f64 = 1e-8;
    const FID_TOL: f64 = 1e-7;
    let text = include_str!("../data/prop4_ip_protocol.json");
    let protocol = Protocol::from_json_str(text).unwrap();
    let pair = fixture("prop4");
    let mut detail = Vec::new();
    let mut pass = validate_protocol(&protocol).valid && verify_set_transformation(&protocol, &pair, FID_TOL);
    for (input, output) in pair.inputs().iter().zip(pair.outputs()) {
        let outcomes = apply_protocol(&protocol, input).unwrap();
        let total: f64 = outcomes.iter().map(|o| o.probability).sum();
        let worst = outcomes
            .iter()
            .map(|o| fidelity_pure(&o.post_state, output).unwrap())
            .fold(f64::INFINITY, f64::min);
        pass &= (total - 1.0).abs() <= PROB_TOL && worst >= 1.0 - FID_TOL;
        detail.push(format!("sum {total:.12}, worst fidelity {worst:.12}"));
    }
    verdict_line(7, pass, &detail.join("; "));
    assert!(pass);
}

#[test]
fn criterion_08_block_split_yield() {
    const TOL: f64 = 1e-9;
    let pair = fixture("prop4");
    let split = subspace_split_protocol((4, 4), Party::A, &[vec![0, 1], vec![2, 3]]).unwrap();
    let bell = state(4, 4, &[(0, 0, H), (1, 1, H)]);
    let mut pass = true;
    let mut detail = Vec::new();
    for p1 in [0.1, 0.3, 0.7] {
        let outcomes = apply_protocol_mixed(&split, &[p1, 1.0 - p1], pair.inputs()).unwrap();
        let first = outcomes.iter().find(|o| o.label.as_deref() == Some("block 0"));
        let (prob, fid) = first.map_or((f64::NAN, f64::NAN), |o| {
            let overlap = trace(&(o.state.matrix() * bell.projector())).re;
            (o.probability, overlap)
        });
        pass &= (prob - p1).abs() <= TOL && (fid - 1.0).abs() <= TOL;
        detail.push(format!("p1 = {p1}: branch probability {prob:.12}, Bell overlap {fid:.12}"));
    }
    verdict_line(8, pass, &detail.join("; "));
    assert!(pass);
}

fn local_unitaries(rng: &mut ChaCha8Rng, (d_a, d_b): (usize, usize)) -> (CMatrix, CMatrix) {
    (random_unitary(rng, d_a), random_unitary(rng, d_b))
}

fn rotate_all(states: &[BipartitePureState], u: &(CMatrix, CMatrix)) -> Vec<BipartitePureState> {
    states.iter().map(|s| s.transformed(&u.0, &u.1).unwrap()).collect()
}

/// Two states that are orthogonal half of the time, so that the
/// distinguishability rules are exercised beyond the non-orthogonal case.
fn random_set(rng: &mut ChaCha8Rng, dims: (usize, usize)) -> Vec<BipartitePureState> {
    let a = random_state(rng, dims.0, dims.1);
    let b = random_state(rng, dims.0, dims.1);
    if rng.random_bool(0.5) {
        return vec![a, b];
    }
    let overlap = a.amplitudes().dotc(b.amplitudes());
    let v: Vec<_> = (b.amplitudes() - a.amplitudes() * overlap).iter().copied().collect();
    let b = BipartitePureState::normalized(dims.0, dims.1, v).unwrap();
    vec![a, b]
}

#[test]
fn criterion_09_property_suites() {
    const INSTANCES: usize = 1000;
    const TOL: f64 = 1e-10;
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let sampler = SamplerConfig { resolution: Some(6), random_samples: 16, seed: 9 };
    let mut failures: Vec<String> = Vec::new();
    for k in 0..INSTANCES {
        let dims = (rng.random_range(2..=3), rng.random_range(2..=3));
        let rank = rng.random_range(1..=dims.0 * dims.1);
        let rho = random_density(&mut rng, dims.0, dims.1, rank);

        let pt = partial_transpose_matrix(rho.matrix(), dims.0, dims.1, Subsystem::B);
        if (partial_transpose_matrix(&pt, dims.0, dims.1, Subsystem::B) - rho.matrix()).norm() > TOL {
            failures.push(format!("{k}: partial transpose is not an involution"));
        }
        for side in [Subsystem::A, Subsystem::B] {
            if (trace(&partial_trace(&rho, side)).re - 1.0).abs() > TOL {
                failures.push(format!("{k}: partial trace changed the trace"));
            }
        }
        let (u, v) = local_unitaries(&mut rng, dims);
        let rotated = DensityOperator::new(dims.0, dims.1, rho.conjugate_by_product(&u, &v)).unwrap();
        if (negativity(&rho) - negativity(&rotated)).abs() > 1e-9 {
            failures.push(format!("{k}: negativity changed under local unitaries"));
        }

        let in_dims = (rng.random_range(2..=3), rng.random_range(2..=3));
        let out_dims = (rng.random_range(2..=3), rng.random_range(2..=3));
        let pair = SetPair::new(random_set(&mut rng, in_dims), random_set(&mut rng, out_dims)).unwrap();
        let u_in = local_unitaries(&mut rng, in_dims);
        let u_out = local_unitaries(&mut rng, out_dims);
        let moved = SetPair::new(rotate_all(pair.inputs(), &u_in), rotate_all(pair.outputs(), &u_out)).unwrap();
        let before = classify_region_with(&pair, &sampler).pattern();
        let after = classify_region_with(&moved, &sampler).pattern();
        if before != after {
            failures.push(format!("{k}: condition verdicts {before:?} became {after:?}"));
        }
    }
    let pass = failures.is_empty();
    verdict_line(9, pass, &format!("{INSTANCES} seeded instances, {} failures {:?}", failures.len(), &failures[..failures.len().min(5)]));
    assert!(pass);
}

#[test]
fn criterion_10_literature_facts() {
    use OpClass::{All, Ppt, Sep, Locc};
    let expected = [
        ("nlwe-basis", Locc, Verdict::No),
        ("nlwe-basis", Sep, Verdict::Yes),
        ("yu-duan", Sep, Verdict::No),
        ("yu-duan", Ppt, Verdict::Yes),
        ("bell-basis", Ppt, Verdict::No),
        ("bell-basis", All, Verdict::Yes),
    ];
    let mut bad = Vec::new();
    for (id, class, want) in expected {
        let got = class_distinguishable(id, class).map(|t| t.value);
        if got.as_ref().ok() != Some(&want) {
            bad.push(format!("{id} {}: {got:?}", class.as_str()));
        }
    }
    let table_ok = KnownFactTable::bundled().facts().count() > 0;
    let non_monotone = r#"{"facts": [
        {"fixture_id": "x", "class": "SEP", "distinguishable": true, "source": "t"},
        {"fixture_id": "x", "class": "PPT", "distinguishable": false, "source": "t"}]}"#;
    let rejects = matches!(KnownFactTable::from_json(non_monotone), Err(Error::NonMonotoneFacts(_)));
    let pass = bad.is_empty() && table_ok && rejects;
    verdict_line(10, pass, &format!("6 facts, monotonicity enforced on load: {rejects}; mismatches {bad:?}"));
    assert!(pass);
}
