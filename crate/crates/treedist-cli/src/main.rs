//! Command-line driver over the tree-distance library.
//!
//! Every subcommand prints plain human-readable lines by default, or a
//! single structured JSON report with `--json`. Exit codes: 0 success,
//! 1 usage error (including infeasible generator constraints), 2 file
//! parse or validation error, 3 oracle cap exceeded.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Map, Value};

use treedist::decide::{DecideReport, Engine};
use treedist::gh::{gh_candidates, min_interleaving_over_roots_report};
use treedist::io::{
    generate_tree_text, parse_tree_text, GenKind, GenSpec, ParsedTree,
};
use treedist::oracle::{
    brute_force_decide, brute_force_gh_discrete, brute_force_interleaving, OracleCaps,
    OracleError,
};
use treedist::search::{
    candidate_set, compute_interleaving_report, compute_interleaving_scan_report, SearchStats,
};
use treedist::tree::{merge_degree_bound, metric_degree_bound};
use treedist::{MergeTree, MetricTree, Rational};

#[derive(Parser)]
#[command(
    name = "treedist",
    version,
    about = "Exact interleaving distances between merge trees and a \
             constant-factor Gromov-Hausdorff approximation between metric trees"
)]
struct Cli {
    /// Emit a structured JSON report instead of plain lines.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and validate a tree file of either kind.
    Validate {
        /// Tree file to check.
        file: PathBuf,
    },
    /// Interleaving distance between two merge trees.
    #[command(subcommand)]
    Interleave(InterleaveCommand),
    /// Gromov-Hausdorff approximation between two metric trees.
    #[command(subcommand)]
    Gh(GhCommand),
    /// Degree-bound parameters controlling the search.
    #[command(subcommand)]
    Tau(TauCommand),
    /// Candidate threshold lists the searches run over.
    #[command(subcommand)]
    Candidates(CandidatesCommand),
    /// Exhaustive reference computations (slow, size- and work-capped).
    #[command(subcommand)]
    Oracle(OracleCommand),
    /// Generate a random tree file.
    Gen(GenArgs),
}

#[derive(Subcommand)]
enum InterleaveCommand {
    /// Is the interleaving distance at most the threshold? Prints yes/no.
    Decide {
        /// First merge-tree file.
        t1: PathBuf,
        /// Second merge-tree file.
        t2: PathBuf,
        /// Threshold, a nonnegative rational (e.g. 3, 7/2, 2.5).
        #[arg(long, value_parser = parse_nonnegative_rational)]
        delta: Rational,
        #[arg(long, value_enum, default_value_t)]
        engine: EngineArg,
    },
    /// The interleaving distance, an exact rational.
    Compute {
        /// First merge-tree file.
        t1: PathBuf,
        /// Second merge-tree file.
        t2: PathBuf,
        #[arg(long, value_enum, default_value_t)]
        method: MethodArg,
        #[arg(long, value_enum, default_value_t)]
        engine: EngineArg,
    },
}

#[derive(Subcommand)]
enum GhCommand {
    /// 14-approximation interval for the Gromov-Hausdorff distance.
    Approx {
        /// First metric-tree file.
        m1: PathBuf,
        /// Second metric-tree file.
        m2: PathBuf,
        #[arg(long, value_enum, default_value_t)]
        engine: EngineArg,
    },
}

#[derive(Subcommand)]
enum TauCommand {
    /// Degree bound of a merge-tree pair at a threshold.
    Merge {
        t1: PathBuf,
        t2: PathBuf,
        /// Threshold, a nonnegative rational.
        #[arg(long, value_parser = parse_nonnegative_rational)]
        delta: Rational,
    },
    /// Degree bound of a metric-tree pair at a threshold.
    Metric {
        m1: PathBuf,
        m2: PathBuf,
        /// Threshold, a nonnegative rational.
        #[arg(long, value_parser = parse_nonnegative_rational)]
        delta: Rational,
    },
}

#[derive(Subcommand)]
enum CandidatesCommand {
    /// Candidate thresholds for the interleaving distance of a merge-tree pair.
    Interleave { t1: PathBuf, t2: PathBuf },
    /// Union of candidate thresholds over all root pairs of a metric-tree pair.
    Gh { m1: PathBuf, m2: PathBuf },
}

#[derive(Subcommand)]
enum OracleCommand {
    /// Exhaustive threshold decision. Prints yes/no.
    Decide {
        t1: PathBuf,
        t2: PathBuf,
        /// Threshold, a nonnegative rational.
        #[arg(long, value_parser = parse_nonnegative_rational)]
        delta: Rational,
        #[command(flatten)]
        caps: CapArgs,
    },
    /// Exhaustive interleaving distance.
    Interleave {
        t1: PathBuf,
        t2: PathBuf,
        #[command(flatten)]
        caps: CapArgs,
    },
    /// Exact Gromov-Hausdorff distance between the node sets (vertices
    /// only, trees of at most 5 nodes).
    Gh { m1: PathBuf, m2: PathBuf },
}

#[derive(Args)]
struct CapArgs {
    /// Largest admissible instance size index.
    #[arg(long)]
    size_cap: Option<u64>,
    /// Largest number of enumeration states visited.
    #[arg(long)]
    work_cap: Option<u64>,
}

impl CapArgs {
    fn resolve(&self) -> OracleCaps {
        let defaults = OracleCaps::default();
        OracleCaps {
            size_cap: self.size_cap.unwrap_or(defaults.size_cap),
            work_cap: self.work_cap.unwrap_or(defaults.work_cap),
        }
    }
}

#[derive(Args)]
struct GenArgs {
    /// Which kind of tree to generate.
    #[arg(long, value_enum)]
    kind: GenKindArg,
    /// Node count, at least 1.
    #[arg(long)]
    nodes: usize,
    /// RNG seed; equal seeds give byte-identical output.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Smallest height (merge) or edge length (metric, clamped to 1).
    #[arg(long, default_value_t = 0)]
    low: i64,
    /// Largest height or edge length, inclusive.
    #[arg(long, default_value_t = 8)]
    high: i64,
    /// Most children per node (merge) or neighbors per node (metric).
    #[arg(long, default_value_t = 3)]
    max_degree: usize,
    /// Write to this file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Default, ValueEnum)]
enum EngineArg {
    /// Tabulate every valid pair.
    Slow,
    /// Tabulate sensible pairs only (the default).
    #[default]
    Fast,
}

impl From<EngineArg> for Engine {
    fn from(arg: EngineArg) -> Engine {
        match arg {
            EngineArg::Slow => Engine::Slow,
            EngineArg::Fast => Engine::Fast,
        }
    }
}

#[derive(Clone, Copy, Default, ValueEnum)]
enum MethodArg {
    /// Ascending linear scan over the candidates.
    Scan,
    /// Degree-classed double binary search (the default).
    #[default]
    DoubleBinary,
}

#[derive(Clone, Copy, ValueEnum)]
enum GenKindArg {
    Merge,
    Metric,
}

fn parse_nonnegative_rational(text: &str) -> Result<Rational, String> {
    let value: Rational = text.parse().map_err(|e| format!("{e}"))?;
    if value.is_negative() {
        return Err("threshold must be nonnegative".to_owned());
    }
    Ok(value)
}

// One failure kind per documented nonzero exit code.
enum Failure {
    /// Exit 1: bad arguments or infeasible generator constraints.
    Usage(String),
    /// Exit 2: a tree file failed to read, parse, or validate.
    Input(String),
    /// Exit 3: an oracle refused the instance.
    Oracle(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Input(_) => 2,
            Failure::Oracle(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Input(m) | Failure::Oracle(m) => m,
        }
    }
}

impl From<OracleError> for Failure {
    fn from(e: OracleError) -> Failure {
        Failure::Oracle(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // Help and version requests land here too; only real usage
            // errors take the nonzero path.
            let code = u8::from(err.use_stderr());
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {}", failure.message());
            ExitCode::from(failure.code())
        }
    }
}

/// One loaded input file: its parsed content plus its report digest.
struct Input {
    tree: ParsedTree,
    info: Value,
}

fn load(path: &Path) -> Result<Input, Failure> {
    let bytes = std::fs::read(path)
        .map_err(|e| Failure::Input(format!("cannot read {}: {e}", path.display())))?;
    let text = String::from_utf8(bytes.clone())
        .map_err(|_| Failure::Input(format!("{}: not valid UTF-8", path.display())))?;
    let tree = parse_tree_text(&text)
        .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    Ok(Input {
        tree,
        info: json!({
            "path": path.display().to_string(),
            "bytes": bytes.len(),
            "fnv1a64": format!("{:016x}", fnv1a64(&bytes)),
        }),
    })
}

fn load_merge(path: &Path) -> Result<(MergeTree, Value), Failure> {
    let input = load(path)?;
    match input.tree {
        ParsedTree::Merge(t) => Ok((t, input.info)),
        ParsedTree::Metric(_) => Err(Failure::Input(format!(
            "{}: expected a mergetree file, found metrictree",
            path.display()
        ))),
    }
}

fn load_metric(path: &Path) -> Result<(MetricTree, Value), Failure> {
    let input = load(path)?;
    match input.tree {
        ParsedTree::Metric(m) => Ok((m, input.info)),
        ParsedTree::Merge(_) => Err(Failure::Input(format!(
            "{}: expected a metrictree file, found mergetree",
            path.display()
        ))),
    }
}

fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        hash ^= u64::from(b);
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

/// The `--json` report. Rational values appear as `{text, decimal}`
/// objects whose `text` is the exact `p/q` form.
#[derive(Serialize)]
struct Report {
    command: String,
    inputs: Vec<Value>,
    result: Value,
    certificate: Value,
    counters: Map<String, Value>,
    elapsed_ms: f64,
}

/// What one subcommand produced, before formatting.
struct Outcome {
    /// Plain-output lines.
    lines: Vec<String>,
    inputs: Vec<Value>,
    result: Value,
    certificate: Value,
    counters: Map<String, Value>,
}

impl Outcome {
    fn new(lines: Vec<String>, inputs: Vec<Value>, result: Value) -> Outcome {
        Outcome {
            lines,
            inputs,
            result,
            certificate: Value::Null,
            counters: Map::new(),
        }
    }
}

fn rational_json(value: &Rational) -> Value {
    json!({ "text": value.to_string(), "decimal": value.decimal_approx() })
}

fn rational_line(value: &Rational) -> String {
    format!("{} ({})", value, value.decimal_approx())
}

fn counters_of(pairs: &[(&str, u64)]) -> Map<String, Value> {
    pairs
        .iter()
        .map(|&(name, count)| (name.to_owned(), Value::from(count)))
        .collect()
}

fn decide_counters(report: &DecideReport) -> Map<String, Value> {
    counters_of(&[
        ("pairs_inspected", report.pairs_inspected),
        ("max_set_size", report.max_set_size as u64),
        ("max_child_set_size", report.max_child_set_size as u64),
        ("max_bucket_len", report.max_bucket_len as u64),
        ("levels", report.levels as u64),
    ])
}

fn search_counters(stats: &SearchStats) -> Map<String, Value> {
    counters_of(&[
        ("decide_calls", stats.decide_calls),
        ("tau_evaluations", stats.tau_evaluations),
        ("max_tau_probed", stats.max_tau_probed as u64),
    ])
}

fn run(cli: &Cli) -> Result<(), Failure> {
    let started = Instant::now();
    let outcome = dispatch(&cli.command)?;
    let elapsed_ms = started.elapsed().as_secs_f64() * 1e3;
    if cli.json {
        let report = Report {
            command: std::env::args().skip(1).collect::<Vec<_>>().join(" "),
            inputs: outcome.inputs,
            result: outcome.result,
            certificate: outcome.certificate,
            counters: outcome.counters,
            elapsed_ms,
        };
        println!(
            "{}",
            serde_json::to_string_pretty(&report).expect("reports serialize")
        );
    } else {
        for line in &outcome.lines {
            println!("{line}");
        }
    }
    Ok(())
}

fn dispatch(command: &Command) -> Result<Outcome, Failure> {
    match command {
        Command::Validate { file } => {
            let input = load(file)?;
            let (kind, nodes, edges) = match &input.tree {
                ParsedTree::Merge(t) => ("mergetree", t.node_count(), t.node_count() - 1),
                ParsedTree::Metric(m) => ("metrictree", m.node_count(), m.edges().len()),
            };
            Ok(Outcome::new(
                vec![format!("ok: {kind} with {nodes} nodes, {edges} edges")],
                vec![input.info],
                json!({ "kind": kind, "nodes": nodes, "edges": edges }),
            ))
        }

        Command::Interleave(InterleaveCommand::Decide {
            t1,
            t2,
            delta,
            engine,
        }) => {
            let (t1, i1) = load_merge(t1)?;
            let (t2, i2) = load_merge(t2)?;
            let report = Engine::from(*engine).decide_report(&t1, &t2, delta);
            let mut outcome = Outcome::new(
                vec![if report.answer { "yes" } else { "no" }.to_owned()],
                vec![i1, i2],
                json!({ "answer": report.answer, "delta": rational_json(delta) }),
            );
            outcome.counters = decide_counters(&report);
            Ok(outcome)
        }

        Command::Interleave(InterleaveCommand::Compute {
            t1,
            t2,
            method,
            engine,
        }) => {
            let (t1, i1) = load_merge(t1)?;
            let (t2, i2) = load_merge(t2)?;
            let engine = Engine::from(*engine);
            let (distance, stats) = match method {
                MethodArg::Scan => compute_interleaving_scan_report(&t1, &t2, engine),
                MethodArg::DoubleBinary => compute_interleaving_report(&t1, &t2, engine),
            };
            let mut outcome = Outcome::new(
                vec![rational_line(&distance)],
                vec![i1, i2],
                rational_json(&distance),
            );
            outcome.counters = search_counters(&stats);
            Ok(outcome)
        }

        Command::Gh(GhCommand::Approx { m1, m2, engine }) => {
            let (m1, i1) = load_metric(m1)?;
            let (m2, i2) = load_metric(m2)?;
            let (result, stats) =
                min_interleaving_over_roots_report(&m1, &m2, Engine::from(*engine));
            let (u, w) = result.certificate;
            let roots = (m1.name(u).to_owned(), m2.name(w).to_owned());
            let mut outcome = Outcome::new(
                vec![
                    format!(
                        "mu = {}, bounds [{}, {}]",
                        rational_line(&result.mu),
                        rational_line(&result.lower),
                        rational_line(&result.upper),
                    ),
                    format!("roots: {} {}", roots.0, roots.1),
                ],
                vec![i1, i2],
                json!({
                    "mu": rational_json(&result.mu),
                    "lower": rational_json(&result.lower),
                    "upper": rational_json(&result.upper),
                }),
            );
            outcome.certificate = json!({ "root1": roots.0, "root2": roots.1 });
            outcome.counters = counters_of(&[
                ("predicate_probes", stats.predicate_probes),
                ("decide_calls", stats.decide_calls),
                ("tau_evaluations", stats.tau_evaluations),
                ("max_tau_probed", stats.max_tau_probed as u64),
            ]);
            Ok(outcome)
        }

        Command::Tau(TauCommand::Merge { t1, t2, delta }) => {
            let (t1, i1) = load_merge(t1)?;
            let (t2, i2) = load_merge(t2)?;
            let tau = merge_degree_bound(&t1, &t2, delta);
            Ok(Outcome::new(
                vec![format!("tau = {tau}")],
                vec![i1, i2],
                json!({ "tau": tau }),
            ))
        }

        Command::Tau(TauCommand::Metric { m1, m2, delta }) => {
            let (m1, i1) = load_metric(m1)?;
            let (m2, i2) = load_metric(m2)?;
            let tau = metric_degree_bound(&m1, &m2, delta);
            Ok(Outcome::new(
                vec![format!("tau = {tau}")],
                vec![i1, i2],
                json!({ "tau": tau }),
            ))
        }

        Command::Candidates(CandidatesCommand::Interleave { t1, t2 }) => {
            let (t1, i1) = load_merge(t1)?;
            let (t2, i2) = load_merge(t2)?;
            let candidates = candidate_set(&t1, &t2);
            let mut lines = vec![format!("count = {}", candidates.len())];
            let mut values = Vec::new();
            for (value, provenance) in candidates.values.iter().zip(&candidates.provenance) {
                lines.push(rational_line(value));
                let mut entry = rational_json(value);
                let fields = entry.as_object_mut().expect("rational json is an object");
                fields.insert("cross".to_owned(), Value::from(provenance.cross));
                fields.insert("within_first".to_owned(), Value::from(provenance.within_first));
                fields.insert(
                    "within_second".to_owned(),
                    Value::from(provenance.within_second),
                );
                values.push(entry);
            }
            Ok(Outcome::new(
                lines,
                vec![i1, i2],
                json!({ "count": values.len(), "values": values }),
            ))
        }

        Command::Candidates(CandidatesCommand::Gh { m1, m2 }) => {
            let (m1, i1) = load_metric(m1)?;
            let (m2, i2) = load_metric(m2)?;
            let values = gh_candidates(&m1, &m2);
            let mut lines = vec![format!("count = {}", values.len())];
            lines.extend(values.iter().map(rational_line));
            let values: Vec<Value> = values.iter().map(rational_json).collect();
            Ok(Outcome::new(
                lines,
                vec![i1, i2],
                json!({ "count": values.len(), "values": values }),
            ))
        }

        Command::Oracle(OracleCommand::Decide {
            t1,
            t2,
            delta,
            caps,
        }) => {
            let (t1, i1) = load_merge(t1)?;
            let (t2, i2) = load_merge(t2)?;
            let answer = brute_force_decide(&t1, &t2, delta, caps.resolve())?;
            Ok(Outcome::new(
                vec![if answer { "yes" } else { "no" }.to_owned()],
                vec![i1, i2],
                json!({ "answer": answer, "delta": rational_json(delta) }),
            ))
        }

        Command::Oracle(OracleCommand::Interleave { t1, t2, caps }) => {
            let (t1, i1) = load_merge(t1)?;
            let (t2, i2) = load_merge(t2)?;
            let distance = brute_force_interleaving(&t1, &t2, caps.resolve())?;
            Ok(Outcome::new(
                vec![rational_line(&distance)],
                vec![i1, i2],
                rational_json(&distance),
            ))
        }

        Command::Oracle(OracleCommand::Gh { m1, m2 }) => {
            let (m1, i1) = load_metric(m1)?;
            let (m2, i2) = load_metric(m2)?;
            let distance = brute_force_gh_discrete(&m1, &m2)?;
            Ok(Outcome::new(
                vec![rational_line(&distance)],
                vec![i1, i2],
                rational_json(&distance),
            ))
        }

        Command::Gen(args) => {
            let spec = GenSpec {
                kind: match args.kind {
                    GenKindArg::Merge => GenKind::Merge,
                    GenKindArg::Metric => GenKind::Metric,
                },
                nodes: args.nodes,
                seed: args.seed,
                low: args.low,
                high: args.high,
                max_degree: args.max_degree,
            };
            let text = generate_tree_text(&spec).map_err(|e| Failure::Usage(e.to_string()))?;
            match &args.out {
                Some(path) => {
                    std::fs::write(path, &text).map_err(|e| {
                        Failure::Input(format!("cannot write {}: {e}", path.display()))
                    })?;
                    Ok(Outcome::new(
                        vec![format!("wrote {} ({} bytes)", path.display(), text.len())],
                        Vec::new(),
                        json!({ "path": path.display().to_string(), "bytes": text.len() }),
                    ))
                }
                None => {
                    // The raw text, so output can be redirected to a file.
                    let lines = text.lines().map(str::to_owned).collect();
                    Ok(Outcome::new(lines, Vec::new(), json!({ "text": text })))
                }
            }
        }
    }
}
