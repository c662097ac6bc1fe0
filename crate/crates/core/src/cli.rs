//! Command-line front end. `run` is the whole program; `main.rs` only maps its
//! return value to the process exit code.
//!
//! Exit codes: 0 success, 1 corpus mismatch, 2 input error, 3 internal
//! invariant failure.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::codec::{complex_to_json, matrix_to_json};
use crate::conditions::{classify_region_with, ConditionReport, SamplerConfig, SetPair};
use crate::corpus::{bundled_corpus, load_corpus, parse_state, run_corpus, CorpusReport, RunOptions};
use crate::distinguishability::KnownFactTable;
use crate::entanglement::majorization_check;
use crate::error::Error;
use crate::protocols::{
    build_ip_protocol, product_kraus_feasibility, synthesize_nielsen_protocol, validate_protocol,
    verify_transformation, FeasibilityVerdict, Protocol,
};
use crate::qstate::BipartitePureState;

pub const EXIT_OK: i32 = 0;
pub const EXIT_MISMATCH: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_INVARIANT: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "locc", version, about = "Necessary conditions and protocols for LOCC transformations of pure-state sets")]
pub struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value = "human")]
    pub format: Format,
    /// Seed for the random part of the simplex sampler.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Simplex grid resolution (default depends on the number of states).
    #[arg(long, global = true, value_parser = clap::value_parser!(u64).range(2..))]
    pub resolution: Option<u64>,
    /// Random simplex points added to the grid.
    #[arg(long, global = true, default_value_t = 2000)]
    pub samples: usize,
    /// Tolerance for protocol verification.
    #[arg(long, global = true, default_value_t = 1e-7)]
    pub tolerance: f64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Human,
    Json,
}

#[derive(Args, Debug)]
pub struct PairSource {
    /// JSON file with `inputs` and `outputs` state lists.
    #[arg(required_unless_present = "fixture")]
    pub file: Option<PathBuf>,
    /// Take the pair from a bundled corpus fixture instead.
    #[arg(long, conflicts_with = "file")]
    pub fixture: Option<String>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Evaluate conditions (a), (b), (c) and report the region.
    Classify(PairSource),
    /// Majorization test for one conversion; file holds `input` and `output`.
    Nielsen { file: PathBuf },
    /// Run a protocol on a set pair and verify the transformation.
    Simulate {
        /// Protocol JSON file.
        protocol: PathBuf,
        #[command(flatten)]
        pair: PairSource,
    },
    /// Product-Kraus feasibility for the two-qubit Bell-input family.
    Obstruct(PairSource),
    /// Run the regression corpus.
    Corpus {
        /// Corpus file; the bundled corpus when omitted.
        #[arg(long)]
        corpus: Option<PathBuf>,
        /// Keep only fixtures whose id contains this string.
        #[arg(long)]
        filter: Option<String>,
        /// Known-fact table; the bundled table when omitted.
        #[arg(long)]
        facts: Option<PathBuf>,
    },
    /// Build a protocol: a single conversion from a Nielsen file, or a set
    /// pair split by `--partition` (blocks separated by `/`, e.g. `0,1/2,3`).
    Synthesize {
        #[command(flatten)]
        pair: PairSource,
        #[arg(long)]
        partition: Option<String>,
        /// Write the protocol here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

enum Failure {
    Input(String),
    Invariant(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Input(e.to_string())
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let target: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = write!(target, "{}", e.render());
            return code;
        }
    };
    let outcome = std::panic::catch_unwind(std::panic::AssertUnwindSafe(|| execute(&cli, out)));
    match outcome {
        Ok(Ok(code)) => code,
        Ok(Err(Failure::Input(msg))) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_INPUT
        }
        Ok(Err(Failure::Invariant(msg))) => {
            let _ = writeln!(err, "internal invariant failure: {msg}");
            EXIT_INVARIANT
        }
        Err(_) => {
            let _ = writeln!(err, "internal invariant failure: panic");
            EXIT_INVARIANT
        }
    }
}

fn sampler(cli: &Cli) -> SamplerConfig {
    SamplerConfig { resolution: cli.resolution.map(|r| r as usize), random_samples: cli.samples, seed: cli.seed }
}

fn read_json(path: &Path) -> CliResult<Value> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| {
        Failure::Input(format!("{}: line {} column {}: {e}", path.display(), e.line(), e.column()))
    })
}

fn parse_state_list(v: &Value, key: &str) -> CliResult<Vec<BipartitePureState>> {
    let items = v.get(key).and_then(Value::as_array).ok_or_else(|| Failure::Input(format!("missing `{key}` list")))?;
    Ok(items.iter().enumerate().map(|(k, s)| parse_state(s, &format!("$.{key}[{k}]"))).collect::<Result<_, _>>()?)
}

fn fixture_pair(id: &str) -> CliResult<SetPair> {
    let fixture = bundled_corpus()
        .into_iter()
        .find(|f| f.id == id)
        .ok_or_else(|| Failure::Input(Error::UnknownFixture(id.into()).to_string()))?;
    fixture.pair().cloned().ok_or_else(|| Failure::Input(format!("fixture `{id}` is a single state set, not a pair")))
}

fn load_pair(source: &PairSource) -> CliResult<SetPair> {
    if let Some(id) = &source.fixture {
        return fixture_pair(id);
    }
    let path = source.file.as_ref().expect("clap requires file or fixture");
    let v = read_json(path)?;
    Ok(SetPair::new(parse_state_list(&v, "inputs")?, parse_state_list(&v, "outputs")?)?)
}

fn emit(out: &mut dyn Write, v: &Value) -> CliResult<()> {
    let text = serde_json::to_string_pretty(v).map_err(|e| Failure::Invariant(e.to_string()))?;
    writeln!(out, "{text}").map_err(|e| Failure::Input(e.to_string()))
}

macro_rules! say {
    ($out:expr, $($arg:tt)*) => {
        writeln!($out, $($arg)*).map_err(|e| Failure::Input(e.to_string()))?
    };
}

fn execute(cli: &Cli, out: &mut dyn Write) -> CliResult<i32> {
    if !(cli.tolerance > 0.0 && cli.tolerance.is_finite()) {
        return Err(Failure::Input(format!("tolerance must be positive, got {}", cli.tolerance)));
    }
    match &cli.command {
        Command::Classify(source) => classify(cli, &load_pair(source)?, out),
        Command::Nielsen { file } => nielsen(cli, file, out),
        Command::Simulate { protocol, pair } => simulate(cli, protocol, &load_pair(pair)?, out),
        Command::Obstruct(source) => obstruct(cli, &load_pair(source)?, out),
        Command::Corpus { corpus, filter, facts } => corpus_cmd(cli, corpus.as_deref(), filter.clone(), facts.as_deref(), out),
        Command::Synthesize { pair, partition, out: target } => synthesize(cli, pair, partition.as_deref(), target.as_deref(), out),
    }
}

/// Drops the sign of margins that print as zero.
fn shown(x: f64) -> f64 {
    if x.abs() < 5e-7 { 0.0 } else { x }
}

fn dims_label((a, b): (usize, usize)) -> String {
    format!("{a}x{b}")
}

fn classify(cli: &Cli, pair: &SetPair, out: &mut dyn Write) -> CliResult<i32> {
    let report = classify_region_with(pair, &sampler(cli));
    if let Some(w) = &report.cond_b.witness {
        if !w.replay(pair)? {
            return Err(Failure::Invariant(format!("condition (b) witness at p = {:?} does not replay", w.probs)));
        }
    }
    let obstruction = product_kraus_feasibility(pair).ok();
    let note = (report.all_yes() && obstruction.as_ref().is_some_and(|v| !v.feasible))
        .then_some("necessary conditions met; LOCC still impossible (see obstruct)");

    if cli.format == Format::Json {
        emit(
            out,
            &json!({
                "seed": cli.seed,
                "input_dims": [pair.input_dims().0, pair.input_dims().1],
                "output_dims": [pair.output_dims().0, pair.output_dims().1],
                "states": pair.len(),
                "report": report,
                "note": note,
            }),
        )?;
        return Ok(EXIT_OK);
    }
    say!(out, "seed: {}", cli.seed);
    say!(
        out,
        "pair: {} states, inputs {}, outputs {}",
        pair.len(),
        dims_label(pair.input_dims()),
        dims_label(pair.output_dims())
    );
    write_condition_lines(out, &report)?;
    say!(out, "region: {}", report.region);
    if let Some(note) = note {
        say!(out, "note: {note}");
    }
    Ok(EXIT_OK)
}

fn write_condition_lines(out: &mut dyn Write, report: &ConditionReport) -> CliResult<()> {
    let a = &report.cond_a;
    let a_margin = a.pairs.iter().map(|p| p.margin()).fold(f64::INFINITY, f64::min);
    let per_pair: Vec<&str> = a.pairs.iter().map(|p| if p.holds { "YES" } else { "NO" }).collect();
    say!(out, "(a) majorization        {:<7} min margin {:+.6}  pairs [{}]", a.verdict.value.as_str(), shown(a_margin), per_pair.join(" "));
    if let Some(l) = a.first_failing {
        say!(out, "    first failing pair: {l}");
    }

    let b = &report.cond_b;
    let names: Vec<&str> = b.measures.iter().map(|m| m.name()).collect();
    say!(
        out,
        "(b) entanglement        {:<7} min margin {:+.6}  {} points, measures [{}]",
        b.verdict.value.as_str(),
        shown(b.min_margin),
        b.points,
        names.join(", ")
    );
    if let Some(w) = &b.witness {
        say!(
            out,
            "    witness p = {:?}: {} input {:.6} < output {:.6}",
            w.probs,
            w.measure.name(),
            w.input_value,
            w.output_value
        );
    }

    let c = &report.cond_c;
    let worst = &c.lemma1.worst;
    say!(
        out,
        "(c) distinguishability  {:<7} fidelity margin {:+.6} at ({}, {})  [{}]",
        c.verdict.value.as_str(),
        shown(worst.f_out - worst.f_in),
        worst.i + 1,
        worst.j + 1,
        c.verdict.rule
    );
    say!(out, "    {}", c.verdict.justification);
    Ok(())
}

fn nielsen(cli: &Cli, file: &Path, out: &mut dyn Write) -> CliResult<i32> {
    let v = read_json(file)?;
    let field = |key: &str| v.get(key).ok_or_else(|| Failure::Input(format!("missing `{key}` state")));
    let input = parse_state(field("input")?, "$.input")?;
    let output = parse_state(field("output")?, "$.output")?;
    let verdict = majorization_check(&input, &output);
    if cli.format == Format::Json {
        emit(out, &json!({ "seed": cli.seed, "nielsen": verdict }))?;
        return Ok(EXIT_OK);
    }
    say!(out, "nielsen: {}", if verdict.holds { "YES" } else { "NO" });
    say!(out, "margin: {:+.6}", shown(verdict.margin()));
    if let Some(l) = verdict.first_violating_l {
        say!(out, "first violation at l = {l}");
    }
    say!(out, "partial sums (input):  {:?}", verdict.partial_sums_in);
    say!(out, "partial sums (output): {:?}", verdict.partial_sums_out);
    Ok(EXIT_OK)
}

fn simulate(cli: &Cli, protocol_path: &Path, pair: &SetPair, out: &mut dyn Write) -> CliResult<i32> {
    let protocol = Protocol::from_json(&read_json(protocol_path)?)?;
    let validation = validate_protocol(&protocol);
    if !validation.valid {
        let worst = validation.nodes.iter().max_by(|x, y| x.defect.total_cmp(&y.defect));
        let at = worst.map_or(String::new(), |n| format!(" at node {:?} ({})", n.path, n.party.as_str()));
        return Err(Failure::Input(format!(
            "invalid protocol: completeness defect {:.3e}{at}",
            validation.max_defect
        )));
    }
    let report = verify_transformation(&protocol, pair.inputs(), pair.outputs(), cli.tolerance)?;
    let status = if report.verified { "VERIFIED" } else { "NOT VERIFIED" };
    if cli.format == Format::Json {
        emit(out, &json!({ "seed": cli.seed, "status": status, "validation": validation, "report": report }))?;
        return Ok(EXIT_OK);
    }
    say!(out, "protocol: depth {}, {} leaves, completeness defect {:.3e}", protocol.depth(), protocol.leaf_count(), validation.max_defect);
    for check in &report.inputs {
        say!(
            out,
            "input {}: total probability {:.9}, worst fidelity {:.9}  {}",
            check.index + 1,
            check.total_probability,
            check.worst_fidelity,
            if check.ok { "ok" } else { "FAIL" }
        );
    }
    if let Some(note) = &report.note {
        say!(out, "note: {note}");
    }
    say!(out, "{status}");
    Ok(EXIT_OK)
}

fn feasibility_json(v: &FeasibilityVerdict, pair: &SetPair) -> CliResult<Value> {
    let witness = match &v.witness {
        None => Value::Null,
        Some(w) => json!({
            "mu1": complex_to_json(w.mu1),
            "mu2": complex_to_json(w.mu2),
            "a_op": matrix_to_json(&w.kraus.a_op),
            "b_op": matrix_to_json(&w.kraus.b_op),
            "residual": w.residual(pair)?,
        }),
    };
    Ok(json!({
        "status": if v.feasible { "FEASIBLE" } else { "INFEASIBLE" },
        "ratio_set_plus": v.ratio_sets[0].describe(),
        "ratio_set_minus": v.ratio_sets[1].describe(),
        "obstruction": v.obstruction,
        "witness": witness,
    }))
}

fn obstruct(cli: &Cli, pair: &SetPair, out: &mut dyn Write) -> CliResult<i32> {
    let verdict = match product_kraus_feasibility(pair) {
        Ok(v) => v,
        Err(Error::UnsupportedForm(msg)) => return Err(Failure::Input(format!("unsupported-form: {msg}"))),
        Err(e) => return Err(e.into()),
    };
    if let Some(w) = &verdict.witness {
        let residual = w.residual(pair)?;
        if residual > cli.tolerance.max(1e-7) {
            return Err(Failure::Invariant(format!("product Kraus witness residual {residual:.3e}")));
        }
    }
    let body = feasibility_json(&verdict, pair)?;
    if cli.format == Format::Json {
        emit(out, &json!({ "seed": cli.seed, "product_kraus": body }))?;
        return Ok(EXIT_OK);
    }
    say!(out, "product Kraus: {}", body["status"].as_str().unwrap_or_default());
    say!(out, "ratios making mu1 phi1 + mu2 phi2 product: {}", verdict.ratio_sets[0].describe());
    say!(out, "ratios making mu1 phi1 - mu2 phi2 product: {}", verdict.ratio_sets[1].describe());
    if let Some(reason) = &verdict.obstruction {
        say!(out, "obstruction: {reason}");
    }
    if let Some(w) = &body.get("witness").filter(|w| !w.is_null()) {
        say!(out, "witness: mu1 = {}, mu2 = {}, residual {:.3e}", w["mu1"], w["mu2"], w["residual"].as_f64().unwrap_or(f64::NAN));
    }
    Ok(EXIT_OK)
}

fn corpus_cmd(
    cli: &Cli,
    path: Option<&Path>,
    filter: Option<String>,
    facts: Option<&Path>,
    out: &mut dyn Write,
) -> CliResult<i32> {
    let fixtures = match path {
        Some(p) => load_corpus(p)?,
        None => bundled_corpus(),
    };
    let facts = match facts {
        Some(p) => KnownFactTable::load(p)?,
        None => KnownFactTable::bundled(),
    };
    let options = RunOptions { filter, sampler: sampler(cli), facts, protocol_tol: cli.tolerance };
    let report = run_corpus(&fixtures, &options);
    if cli.format == Format::Json {
        emit(out, &serde_json::to_value(&report).map_err(|e| Failure::Invariant(e.to_string()))?)?;
    } else {
        write_corpus_report(out, &report)?;
    }
    Ok(if report.passed() { EXIT_OK } else { EXIT_MISMATCH })
}

fn write_corpus_report(out: &mut dyn Write, report: &CorpusReport) -> CliResult<()> {
    say!(out, "seed: {}", report.seed);
    for f in &report.fixtures {
        let failed: Vec<_> = f.checks.iter().filter(|c| !c.pass).collect();
        let status = if failed.is_empty() { "PASS" } else { "FAIL" };
        say!(out, "{status} {} ({} checks)", f.id, f.checks.len());
        for c in failed {
            say!(out, "    {}: expected {}, got {}", c.check, c.expected, c.actual);
        }
        for n in &f.notes {
            say!(out, "    note: {n}");
        }
    }
    say!(out, "{} fixtures evaluated, {} mismatches", report.fixtures.len(), report.mismatches);
    Ok(())
}

fn parse_partition(text: &str) -> CliResult<Vec<Vec<usize>>> {
    text.split('/')
        .map(|block| {
            block
                .split(',')
                .map(|i| i.trim().parse::<usize>().map_err(|_| Failure::Input(format!("bad partition index `{i}`"))))
                .collect()
        })
        .collect()
}

fn synthesize(
    cli: &Cli,
    source: &PairSource,
    partition: Option<&str>,
    target: Option<&Path>,
    out: &mut dyn Write,
) -> CliResult<i32> {
    let single = match &source.file {
        Some(path) if source.fixture.is_none() => {
            let v = read_json(path)?;
            match (v.get("input"), v.get("output")) {
                (Some(i), Some(o)) => Some((parse_state(i, "$.input")?, parse_state(o, "$.output")?)),
                _ => None,
            }
        }
        _ => None,
    };
    let (protocol, inputs, outputs) = match single {
        Some((input, output)) => (synthesize_nielsen_protocol(&input, &output)?, vec![input], vec![output]),
        None => {
            let pair = load_pair(source)?;
            let partition = partition
                .ok_or_else(|| Failure::Input("a set pair needs --partition (e.g. 0,1/2,3)".into()))
                .and_then(parse_partition)?;
            let protocol = build_ip_protocol(&pair, &partition)?;
            (protocol, pair.inputs().to_vec(), pair.outputs().to_vec())
        }
    };
    let check = verify_transformation(&protocol, &inputs, &outputs, cli.tolerance)?;
    if !check.verified {
        return Err(Failure::Invariant("synthesized protocol does not reproduce its targets".into()));
    }
    let text = serde_json::to_string_pretty(&protocol.to_json()).map_err(|e| Failure::Invariant(e.to_string()))?;
    match target {
        Some(path) => std::fs::write(path, text + "\n").map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?,
        None => say!(out, "{text}"),
    }
    Ok(EXIT_OK)
}
