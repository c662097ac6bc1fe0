//! Regression fixtures: input/output set pairs and single state sets with the
//! verdicts every check is expected to return.
//!
//! File layout (JSON):
//!
//! ```text
//! { "fixtures": [ {
//!     "id": "...", "provenance": "...",
//!     "inputs": [state, ..], "outputs": [state, ..]      // pair fixture
//!     "states": [state, ..]                              // set fixture
//!     "expected": { "<check>": "YES" | "NO" | .., "nielsen": ["YES", ..] },
//!     "published_region": "a ∧ b ∧ c",                   // optional
//!     "ip_partition": [[0, 1], [2, 3]]                   // optional
//! } ] }
//! ```
//!
//! A state is `{"dims": [dA, dB], "amplitudes": [amp, ..]}` (row-major, index
//! `i * dB + j`) or `{"dims": .., "terms": [{"ket": [i, j], "amp": amp}, ..]}`.
//! An amplitude is a number, `[re, im]`, `{"re", "im"}`, or the exact form
//! `{"num", "den", "sqrt", "phase_sign", "imag"}` meaning
//! `phase_sign * num * sqrt(sqrt) / den`, times `i` when `imag` is true.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::codec::{complex_from_json, schema};
use crate::conditions::{classify_region_with, lemma1_check, ConditionReport, SamplerConfig, SetPair};
use crate::distinguishability::{locc_distinguishable, KnownFactTable, OpClass};
use crate::entanglement::majorization_check;
use crate::error::{Error, Result};
use crate::protocols::{build_ip_protocol, product_kraus_feasibility, verify_set_transformation};
use crate::qstate::linalg::{c, C64};
use crate::qstate::BipartitePureState;

const BUNDLED: &str = include_str!("../data/corpus.json");

/// Checks a fixture may name in `expected`.
pub const CHECK_NAMES: &[&str] = &[
    "nielsen",
    "lemma1",
    "cond_a",
    "cond_b",
    "cond_c",
    "region",
    "locc_inputs",
    "locc_outputs",
    "product_kraus",
    "ip_protocol",
    "locc",
    "class_LOCC",
    "class_SEP",
    "class_PPT",
    "class_ALL",
];

const PAIR_CHECKS: &[&str] = &[
    "nielsen", "lemma1", "cond_a", "cond_b", "cond_c", "region", "locc_inputs", "locc_outputs", "product_kraus", "ip_protocol",
];

#[derive(Clone, Debug)]
pub enum FixtureBody {
    Pair(SetPair),
    Set(Vec<BipartitePureState>),
}

/// Expected outcome of one check: a single token or one token per pair.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Expected {
    One(String),
    List(Vec<String>),
}

impl std::fmt::Display for Expected {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Expected::One(s) => f.write_str(s),
            Expected::List(items) => write!(f, "[{}]", items.join(", ")),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Fixture {
    pub id: String,
    pub provenance: String,
    pub body: FixtureBody,
    pub expected: BTreeMap<String, Expected>,
    pub published_region: Option<String>,
    pub ip_partition: Option<Vec<Vec<usize>>>,
}

impl Fixture {
    pub fn pair(&self) -> Option<&SetPair> {
        match &self.body {
            FixtureBody::Pair(p) => Some(p),
            FixtureBody::Set(_) => None,
        }
    }

    pub fn states(&self) -> Option<&[BipartitePureState]> {
        match &self.body {
            FixtureBody::Pair(_) => None,
            FixtureBody::Set(s) => Some(s),
        }
    }
}

pub fn bundled_corpus() -> Vec<Fixture> {
    parse_corpus(BUNDLED).expect("bundled corpus is valid")
}

pub fn load_corpus(path: &Path) -> Result<Vec<Fixture>> {
    parse_corpus(&std::fs::read_to_string(path)?)
}

fn line_of(text: &str, needle: &str) -> Option<usize> {
    text.find(needle).map(|at| text[..at].matches('\n').count() + 1)
}

pub fn parse_corpus(text: &str) -> Result<Vec<Fixture>> {
    if text.trim().is_empty() {
        return Ok(Vec::new());
    }
    let root: Value = serde_json::from_str(text)
        .map_err(|e| schema(format!("line {} column {}", e.line(), e.column()), e.to_string()))?;
    let items = match &root {
        Value::Array(items) => items,
        Value::Object(obj) => obj
            .get("fixtures")
            .and_then(Value::as_array)
            .ok_or_else(|| schema("$.fixtures", "expected a list of fixtures"))?,
        _ => return Err(schema("$", "expected an object with a `fixtures` list")),
    };
    let mut fixtures: Vec<Fixture> = Vec::with_capacity(items.len());
    for (k, item) in items.iter().enumerate() {
        let id = item.get("id").and_then(Value::as_str).unwrap_or("?");
        let line = line_of(text, &format!("\"{id}\"")).map_or(String::new(), |l| format!("line {l}, "));
        let base = format!("{line}fixtures[{k}] ({id})");
        let fixture = parse_fixture(item, &base)?;
        if fixtures.iter().any(|f| f.id == fixture.id) {
            return Err(schema(format!("{base}.id"), format!("duplicate fixture id `{}`", fixture.id)));
        }
        fixtures.push(fixture);
    }
    Ok(fixtures)
}

fn field<'a>(obj: &'a Map<String, Value>, key: &str, base: &str) -> Result<&'a Value> {
    obj.get(key).ok_or_else(|| schema(format!("{base}.{key}"), "missing field"))
}

fn parse_fixture(value: &Value, base: &str) -> Result<Fixture> {
    let obj = value.as_object().ok_or_else(|| schema(base, "expected a fixture object"))?;
    let id = field(obj, "id", base)?
        .as_str()
        .filter(|s| !s.is_empty())
        .ok_or_else(|| schema(format!("{base}.id"), "expected a nonempty string"))?
        .to_string();
    let provenance = field(obj, "provenance", base)?
        .as_str()
        .filter(|s| !s.trim().is_empty())
        .ok_or_else(|| schema(format!("{base}.provenance"), "expected a nonempty citation"))?
        .to_string();

    let body = match (obj.get("inputs"), obj.get("outputs"), obj.get("states")) {
        (Some(i), Some(o), None) => {
            let inputs = parse_states(i, &format!("{base}.inputs"))?;
            let outputs = parse_states(o, &format!("{base}.outputs"))?;
            FixtureBody::Pair(SetPair::new(inputs, outputs).map_err(|e| schema(base, e.to_string()))?)
        }
        (None, None, Some(s)) => FixtureBody::Set(parse_states(s, &format!("{base}.states"))?),
        _ => return Err(schema(base, "a fixture has either `inputs` and `outputs`, or `states`")),
    };

    let expected_obj = field(obj, "expected", base)?
        .as_object()
        .ok_or_else(|| schema(format!("{base}.expected"), "expected a map from check name to verdict"))?;
    let mut expected = BTreeMap::new();
    for (name, v) in expected_obj {
        let path = format!("{base}.expected.{name}");
        if !CHECK_NAMES.contains(&name.as_str()) {
            return Err(schema(path, format!("unknown check; known checks: {}", CHECK_NAMES.join(", "))));
        }
        let is_pair = matches!(body, FixtureBody::Pair(_));
        if PAIR_CHECKS.contains(&name.as_str()) && !is_pair {
            return Err(schema(path, "check needs an input/output pair"));
        }
        if name == "locc" && is_pair {
            return Err(schema(path, "check needs a single state set; use locc_inputs / locc_outputs"));
        }
        let parsed: Expected =
            serde_json::from_value(v.clone()).map_err(|_| schema(&path, "expected a string or a list of strings"))?;
        validate_expected(name, &parsed, &body, &path)?;
        expected.insert(name.clone(), parsed);
    }

    let published_region = match obj.get("published_region") {
        None | Some(Value::Null) => None,
        Some(Value::String(s)) => Some(s.clone()),
        Some(_) => return Err(schema(format!("{base}.published_region"), "expected a string")),
    };
    let ip_partition = match obj.get("ip_partition") {
        None | Some(Value::Null) => None,
        Some(v) => Some(
            serde_json::from_value::<Vec<Vec<usize>>>(v.clone())
                .map_err(|_| schema(format!("{base}.ip_partition"), "expected a list of index lists"))?,
        ),
    };
    if expected.contains_key("ip_protocol") && ip_partition.is_none() {
        return Err(schema(format!("{base}.ip_partition"), "required by the ip_protocol check"));
    }
    Ok(Fixture { id, provenance, body, expected, published_region, ip_partition })
}

fn validate_expected(name: &str, value: &Expected, body: &FixtureBody, path: &str) -> Result<()> {
    let allowed: &[&str] = match name {
        "region" => return matches!(value, Expected::One(_)).then_some(()).ok_or_else(|| schema(path, "expected a label")),
        "product_kraus" => &["FEASIBLE", "INFEASIBLE", "UNSUPPORTED"],
        "ip_protocol" => &["VERIFIED", "NOT VERIFIED", "ERROR"],
        _ => &["YES", "NO", "UNKNOWN"],
    };
    let tokens: Vec<&String> = match (name, value) {
        ("nielsen", Expected::List(items)) => {
            if let FixtureBody::Pair(pair) = body {
                if items.len() != pair.len() {
                    return Err(schema(path, format!("expected {} entries, one per pair", pair.len())));
                }
            }
            items.iter().collect()
        }
        ("nielsen", Expected::One(_)) => return Err(schema(path, "expected one verdict per pair")),
        (_, Expected::One(s)) => vec![s],
        (_, Expected::List(_)) => return Err(schema(path, "expected a single verdict")),
    };
    for t in tokens {
        if !allowed.contains(&t.as_str()) {
            return Err(schema(path, format!("`{t}` is not one of {}", allowed.join(", "))));
        }
    }
    Ok(())
}

fn parse_states(value: &Value, path: &str) -> Result<Vec<BipartitePureState>> {
    let items = value.as_array().ok_or_else(|| schema(path, "expected a list of states"))?;
    items.iter().enumerate().map(|(k, s)| parse_state(s, &format!("{path}[{k}]"))).collect()
}

/// One state in the corpus encoding; normalization is checked, not imposed.
pub fn parse_state(value: &Value, path: &str) -> Result<BipartitePureState> {
    let obj = value.as_object().ok_or_else(|| schema(path, "expected a state object"))?;
    let dims = obj
        .get("dims")
        .and_then(Value::as_array)
        .filter(|d| d.len() == 2)
        .and_then(|d| Some((d[0].as_u64()? as usize, d[1].as_u64()? as usize)))
        .filter(|(a, b)| *a > 0 && *b > 0)
        .ok_or_else(|| schema(format!("{path}.dims"), "expected [dim_a, dim_b] with positive entries"))?;
    let total = dims.0 * dims.1;
    let amplitudes: Vec<C64> = match (obj.get("amplitudes"), obj.get("terms")) {
        (Some(Value::Array(amps)), None) => {
            if amps.len() != total {
                return Err(schema(
                    format!("{path}.amplitudes"),
                    format!("{} amplitudes for a {}x{} state, expected {total}", amps.len(), dims.0, dims.1),
                ));
            }
            amps.iter()
                .enumerate()
                .map(|(k, a)| parse_amplitude(a, &format!("{path}.amplitudes[{k}]")))
                .collect::<Result<_>>()?
        }
        (None, Some(Value::Array(terms))) => {
            let mut amps = vec![c(0.0, 0.0); total];
            for (k, term) in terms.iter().enumerate() {
                let tpath = format!("{path}.terms[{k}]");
                let ket = term
                    .get("ket")
                    .and_then(Value::as_array)
                    .filter(|k| k.len() == 2)
                    .and_then(|k| Some((k[0].as_u64()? as usize, k[1].as_u64()? as usize)))
                    .filter(|(i, j)| *i < dims.0 && *j < dims.1)
                    .ok_or_else(|| schema(format!("{tpath}.ket"), "expected [i, j] inside the local dimensions"))?;
                let amp = term.get("amp").ok_or_else(|| schema(format!("{tpath}.amp"), "missing field"))?;
                amps[ket.0 * dims.1 + ket.1] += parse_amplitude(amp, &format!("{tpath}.amp"))?;
            }
            amps
        }
        _ => return Err(schema(path, "a state has exactly one of `amplitudes` (list) or `terms` (list)")),
    };
    BipartitePureState::new(dims.0, dims.1, amplitudes).map_err(|e| schema(path, e.to_string()))
}

/// Expands one amplitude; exact forms are `phase_sign * num * sqrt(sqrt) / den`.
pub fn parse_amplitude(value: &Value, path: &str) -> Result<C64> {
    let Some(obj) = value.as_object().filter(|o| !o.contains_key("re") && !o.contains_key("im")) else {
        return complex_from_json(value, path);
    };
    for key in obj.keys() {
        if !["num", "den", "sqrt", "phase_sign", "imag"].contains(&key.as_str()) {
            return Err(schema(format!("{path}.{key}"), "unknown field in exact amplitude"));
        }
    }
    let number = |key: &str, default: f64| -> Result<f64> {
        match obj.get(key) {
            None => Ok(default),
            Some(v) => v.as_f64().ok_or_else(|| schema(format!("{path}.{key}"), "expected a number")),
        }
    };
    let num = number("num", 1.0)?;
    let den = number("den", 1.0)?;
    let radicand = number("sqrt", 1.0)?;
    let sign = number("phase_sign", 1.0)?;
    if den == 0.0 {
        return Err(schema(format!("{path}.den"), "denominator is zero"));
    }
    if radicand < 0.0 {
        return Err(schema(format!("{path}.sqrt"), "radicand is negative"));
    }
    if sign != 1.0 && sign != -1.0 {
        return Err(schema(format!("{path}.phase_sign"), "expected 1 or -1"));
    }
    let imag = match obj.get("imag") {
        None => false,
        Some(v) => v.as_bool().ok_or_else(|| schema(format!("{path}.imag"), "expected a boolean"))?,
    };
    let magnitude = sign * num * radicand.sqrt() / den;
    Ok(if imag { c(0.0, magnitude) } else { c(magnitude, 0.0) })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub check: String,
    pub expected: Expected,
    pub actual: Expected,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FixtureReport {
    pub id: String,
    pub checks: Vec<CheckResult>,
    pub notes: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorpusReport {
    pub seed: u64,
    pub fixtures: Vec<FixtureReport>,
    pub mismatches: usize,
}

impl CorpusReport {
    pub fn passed(&self) -> bool {
        self.mismatches == 0
    }
}

#[derive(Clone, Debug)]
pub struct RunOptions {
    /// Substring of fixture ids to keep.
    pub filter: Option<String>,
    pub sampler: SamplerConfig,
    pub facts: KnownFactTable,
    /// Tolerance for protocol verification.
    pub protocol_tol: f64,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self { filter: None, sampler: SamplerConfig::default(), facts: KnownFactTable::bundled(), protocol_tol: 1e-7 }
    }
}

pub fn run_corpus(fixtures: &[Fixture], options: &RunOptions) -> CorpusReport {
    let selected = fixtures
        .iter()
        .filter(|f| options.filter.as_deref().is_none_or(|needle| f.id.contains(needle)));
    let reports: Vec<FixtureReport> = selected.map(|f| run_fixture(f, options)).collect();
    let mismatches = reports.iter().flat_map(|r| &r.checks).filter(|c| !c.pass).count();
    CorpusReport { seed: options.sampler.seed, fixtures: reports, mismatches }
}

fn one(s: impl Into<String>) -> Expected {
    Expected::One(s.into())
}

fn run_fixture(fixture: &Fixture, options: &RunOptions) -> FixtureReport {
    let needs_report = fixture.expected.keys().any(|k| k.starts_with("cond_") || k == "region")
        || fixture.published_region.is_some();
    let report: Option<ConditionReport> =
        fixture.pair().filter(|_| needs_report).map(|p| classify_region_with(p, &options.sampler));
    let mut notes = Vec::new();

    let mut checks = Vec::new();
    for (name, expected) in &fixture.expected {
        let actual = evaluate_check(fixture, name, report.as_ref(), options, &mut notes);
        let pass = &actual == expected;
        checks.push(CheckResult { check: name.clone(), expected: expected.clone(), actual, pass });
    }

    if let (Some(published), Some(report)) = (&fixture.published_region, &report) {
        if published != &report.region {
            let mut note = format!("computed region `{}` differs from the published pattern `{published}`", report.region);
            if let Some(w) = &report.cond_b.witness {
                note.push_str(&format!(
                    "; condition (b) fails under {} at p = {:?} ({:.6} < {:.6})",
                    w.measure.name(),
                    w.probs,
                    w.input_value,
                    w.output_value
                ));
            }
            notes.push(note);
        }
    }
    FixtureReport { id: fixture.id.clone(), checks, notes }
}

fn evaluate_check(
    fixture: &Fixture,
    name: &str,
    report: Option<&ConditionReport>,
    options: &RunOptions,
    notes: &mut Vec<String>,
) -> Expected {
    let verdict = |t: crate::verdict::TriState| one(t.value.as_str());
    if let Some(class) = name.strip_prefix("class_").and_then(OpClass::parse) {
        return match options.facts.lookup(&fixture.id, class) {
            Ok(t) => verdict(t),
            Err(e) => {
                notes.push(format!("{name}: {e}"));
                one("ERROR")
            }
        };
    }
    if name == "locc" {
        let states = fixture.states().expect("checked at load");
        return verdict(locc_distinguishable(states));
    }
    let pair = fixture.pair().expect("checked at load");
    match name {
        "nielsen" => Expected::List(
            pair.inputs()
                .iter()
                .zip(pair.outputs())
                .map(|(a, b)| if majorization_check(a, b).holds { "YES".into() } else { "NO".into() })
                .collect(),
        ),
        "lemma1" => verdict(lemma1_check(pair).verdict),
        "cond_a" => verdict(report.expect("computed").cond_a.verdict.clone()),
        "cond_b" => verdict(report.expect("computed").cond_b.verdict.clone()),
        "cond_c" => verdict(report.expect("computed").cond_c.verdict.clone()),
        "region" => one(report.expect("computed").region.clone()),
        "locc_inputs" => verdict(locc_distinguishable(pair.inputs())),
        "locc_outputs" => verdict(locc_distinguishable(pair.outputs())),
        "product_kraus" => match product_kraus_feasibility(pair) {
            Ok(v) if v.feasible => one("FEASIBLE"),
            Ok(_) => one("INFEASIBLE"),
            Err(Error::UnsupportedForm(msg)) => {
                notes.push(format!("product_kraus: {msg}"));
                one("UNSUPPORTED")
            }
            Err(e) => {
                notes.push(format!("product_kraus: {e}"));
                one("ERROR")
            }
        },
        "ip_protocol" => {
            let partition = fixture.ip_partition.as_deref().expect("checked at load");
            match build_ip_protocol(pair, partition) {
                Ok(p) if verify_set_transformation(&p, pair, options.protocol_tol) => one("VERIFIED"),
                Ok(_) => one("NOT VERIFIED"),
                Err(e) => {
                    notes.push(format!("ip_protocol: {e}"));
                    one("ERROR")
                }
            }
        }
        other => unreachable!("unvalidated check `{other}`"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn exact_amplitudes_expand() {
        let h = parse_amplitude(&json!({"num": 1, "sqrt": 2, "den": 2}), "a").unwrap();
        assert!((h.re - std::f64::consts::FRAC_1_SQRT_2).abs() <= f64::EPSILON);
        let a = parse_amplitude(&json!({"num": 2, "sqrt": 5, "den": 5}), "a").unwrap();
        assert!((a.re - 0.8f64.sqrt()).abs() <= 2.0 * f64::EPSILON);
        let b = parse_amplitude(&json!({"sqrt": 10, "den": 10, "phase_sign": -1}), "a").unwrap();
        assert!((b.re + 0.1f64.sqrt()).abs() <= 2.0 * f64::EPSILON);
        let i = parse_amplitude(&json!({"imag": true}), "a").unwrap();
        assert_eq!(i, c(0.0, 1.0));
        assert!(parse_amplitude(&json!({"den": 0}), "a").is_err());
        assert!(parse_amplitude(&json!({"phase_sign": 2}), "a").is_err());
    }

    #[test]
    fn empty_file_is_empty_corpus() {
        assert!(parse_corpus("").unwrap().is_empty());
        assert!(parse_corpus("  \n").unwrap().is_empty());
    }

    #[test]
    fn unnormalized_state_is_rejected_with_location() {
        let text = r#"{"fixtures": [{"id": "bad", "provenance": "test",
            "states": [{"dims": [1, 2], "amplitudes": [1, 1]}, {"dims": [1, 2], "amplitudes": [1, 0]}],
            "expected": {"locc": "YES"}}]}"#;
        let err = parse_corpus(text).unwrap_err().to_string();
        assert!(err.contains("fixtures[0] (bad).states[0]"), "{err}");
        assert!(err.contains("line 1"), "{err}");
    }

    #[test]
    fn unknown_check_is_rejected() {
        let text = r#"{"fixtures": [{"id": "x", "provenance": "test",
            "states": [{"dims": [1, 2], "amplitudes": [1, 0]}], "expected": {"cond_z": "YES"}}]}"#;
        assert!(parse_corpus(text).unwrap_err().to_string().contains("unknown check"));
    }

    #[test]
    fn sparse_terms_match_dense_amplitudes() {
        let dense = parse_state(&json!({"dims": [2, 2], "amplitudes": [0, 1, 0, 0]}), "s").unwrap();
        let sparse = parse_state(&json!({"dims": [2, 2], "terms": [{"ket": [0, 1], "amp": 1}]}), "s").unwrap();
        assert_eq!(dense.amplitudes(), sparse.amplitudes());
    }

    #[test]
    fn bundled_corpus_ids() {
        let ids: Vec<String> = bundled_corpus().into_iter().map(|f| f.id).collect();
        assert_eq!(
            ids,
            [
                "prop2-a", "prop2-b", "prop2-c", "prop3-ab", "prop3-ac", "prop3-bc", "prop4", "prop5", "yu-duan",
                "bell-basis", "nlwe-basis"
            ]
        );
    }
}
