//! Command-line front end: reproduction pipelines, violation searches,
//! fixture export and observable checks, all reporting JSON.
//!
//! Exit codes: 0 when every check passes, 1 when a mathematical check fails,
//! 2 on usage or I/O errors.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use zerograph::channel::QuantumChannel;
use zerograph::graphcap::search_violation;
use zerograph::opalg::{CMat, OperatorSpace};
use zerograph::povm::{find_indistinguishable, make_observable, Observable};
use zerograph::superact::{
    graph_generators, make_graph, kraus_fixture, povm_fixture, reproduce_corollary1,
    reproduce_theorem2, GraphFamilySpec, Report,
};

#[derive(Parser)]
#[command(
    name = "zerograph",
    version,
    about = "Channels with prescribed noncommutative graphs: zero-error code certification and superactivation pipelines"
)]
struct Cli {
    /// Worker threads for the search (env ZEROGRAPH_THREADS overrides;
    /// default: available parallelism)
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Pretty-print JSON output
    #[arg(long, global = true)]
    pretty: bool,

    /// Write the report to this path instead of standard output
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a full reproduction pipeline and report every check
    Reproduce {
        #[command(subcommand)]
        target: ReproduceTarget,
    },
    /// Multi-start violation search over a graph
    Search(SearchArgs),
    /// Write the exact fixtures in their JSON encodings
    Export(ExportArgs),
    /// Validate an observable and search it for indistinguishable subspaces
    PovmCheck(PovmCheckArgs),
}

#[derive(Subcommand)]
enum ReproduceTarget {
    /// The 4-dimensional channel: fixtures, gap, tensor-square codes, recovery
    Corollary1 {
        /// Phase values for the code family (repeatable; folded into [0, 2pi);
        /// default: 16 evenly spaced points)
        #[arg(long = "t")]
        t_values: Vec<f64>,
        #[arg(long, default_value_t = 500)]
        starts: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
    /// The n-block family: graph formula, minimal environment, gap, code
    Theorem2 {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0.0)]
        t: f64,
        #[arg(long, default_value_t = 500)]
        starts: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
}

#[derive(Args)]
struct SearchArgs {
    /// Graph selector: l0, l0sq, ln, lnsq, or a path to a graph JSON file
    #[arg(long)]
    graph: String,
    /// Block count for the ln / lnsq selectors
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, default_value_t = 500)]
    starts: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
}

#[derive(Args)]
struct ExportArgs {
    #[arg(long, value_enum)]
    what: ExportTarget,
    /// Block count for graph-ln
    #[arg(long)]
    n: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ExportTarget {
    Povm,
    Kraus,
    GraphL0,
    GraphLn,
}

#[derive(Args)]
struct PovmCheckArgs {
    /// Observable JSON file; the built-in five-effect fixture when omitted
    #[arg(long)]
    file: Option<PathBuf>,
    #[arg(long, default_value_t = 200)]
    starts: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
}

enum Failure {
    /// A mathematical check failed; the named checks go to stderr.
    Math(Vec<String>),
    /// Bad flags or unreadable files.
    Usage(String),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    configure_threads(cli.threads);
    let result = match &cli.command {
        Command::Reproduce { target } => run_reproduce(target, &cli),
        Command::Search(args) => run_search(args, &cli),
        Command::Export(args) => run_export(args, &cli),
        Command::PovmCheck(args) => run_povm_check(args, &cli),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Math(names)) => {
            for name in names {
                eprintln!("check failed: {name}");
            }
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn configure_threads(flag: Option<usize>) {
    let from_env = std::env::var("ZEROGRAPH_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok());
    if let Some(n) = from_env.or(flag) {
        // ignore failure: the pool can only be configured once
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global();
    }
}

fn emit(cli: &Cli, value: &impl serde::Serialize) -> Result<(), Failure> {
    let text = if cli.pretty {
        serde_json::to_string_pretty(value)
    } else {
        serde_json::to_string(value)
    }
    .map_err(|e| Failure::Usage(format!("serialization failed: {e}")))?;
    match &cli.out {
        Some(path) => fs::write(path, text.as_bytes())
            .map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display()))),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn fold_t(values: &[f64]) -> Vec<f64> {
    let tau = 2.0 * std::f64::consts::PI;
    values.iter().map(|t| t.rem_euclid(tau)).collect()
}

fn default_t_grid() -> Vec<f64> {
    (0..16)
        .map(|k| 2.0 * std::f64::consts::PI * k as f64 / 16.0)
        .collect()
}

fn report_outcome(cli: &Cli, report: &Report) -> Result<(), Failure> {
    emit(cli, report)?;
    if report.all_pass() {
        Ok(())
    } else {
        Err(Failure::Math(
            report.failing().iter().map(|c| c.name.clone()).collect(),
        ))
    }
}

fn run_reproduce(target: &ReproduceTarget, cli: &Cli) -> Result<(), Failure> {
    match target {
        ReproduceTarget::Corollary1 {
            t_values,
            starts,
            seed,
        } => {
            let grid = if t_values.is_empty() {
                default_t_grid()
            } else {
                fold_t(t_values)
            };
            let report = reproduce_corollary1(&grid, *starts, *seed)
                .map_err(|e| Failure::Usage(e.to_string()))?;
            report_outcome(cli, &report)
        }
        ReproduceTarget::Theorem2 { n, t, starts, seed } => {
            let t = t.rem_euclid(2.0 * std::f64::consts::PI);
            let report = reproduce_theorem2(*n, t, *starts, *seed)
                .map_err(|e| Failure::Usage(e.to_string()))?;
            report_outcome(cli, &report)
        }
    }
}

fn load_graph_file(path: &str) -> Result<OperatorSpace, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::Usage(format!("cannot read graph file {path}: {e}")))?;
    let wire: GraphFile = serde_json::from_str(&text)
        .map_err(|e| Failure::Usage(format!("malformed graph file {path}: {e}")))?;
    OperatorSpace::span(&wire.generators, wire.ambient_dim)
        .map_err(|e| Failure::Usage(format!("graph file {path} does not span: {e}")))
}

#[derive(serde::Serialize, serde::Deserialize)]
struct GraphFile {
    ambient_dim: usize,
    generators: Vec<CMat>,
}

fn select_graph(args: &SearchArgs) -> Result<OperatorSpace, Failure> {
    let need_n = || {
        args.n.ok_or_else(|| {
            Failure::Usage("the ln / lnsq selectors need --n".into())
        })
    };
    let build = |spec: &GraphFamilySpec| {
        make_graph(spec).map_err(|e| Failure::Usage(e.to_string()))
    };
    match args.graph.as_str() {
        "l0" => build(&GraphFamilySpec::l0()),
        "l0sq" => {
            let g = build(&GraphFamilySpec::l0())?;
            Ok(OperatorSpace::tensor(&g, &g))
        }
        "ln" => build(&GraphFamilySpec::ln(need_n()?)),
        "lnsq" => {
            let g = build(&GraphFamilySpec::ln(need_n()?))?;
            Ok(OperatorSpace::tensor(&g, &g))
        }
        path => load_graph_file(path),
    }
}

fn run_search(args: &SearchArgs, cli: &Cli) -> Result<(), Failure> {
    if args.starts == 0 {
        return Err(Failure::Usage("--starts must be at least 1".into()));
    }
    let space = select_graph(args)?;
    let report = search_violation(&space, args.starts, args.seed)
        .map_err(|e| Failure::Usage(e.to_string()))?;
    // a completed search always exits 0: the best value is data, not failure
    emit(cli, &report)
}

fn run_export(args: &ExportArgs, cli: &Cli) -> Result<(), Failure> {
    match args.what {
        ExportTarget::Povm => {
            let basis = povm_fixture();
            write_export(cli, "povm.json", &basis)
        }
        ExportTarget::Kraus => {
            let ch: QuantumChannel = kraus_fixture();
            write_export(cli, "kraus.json", &ch)
        }
        ExportTarget::GraphL0 => {
            let file = GraphFile {
                ambient_dim: 4,
                generators: graph_generators(&GraphFamilySpec::l0())
                    .map_err(|e| Failure::Usage(e.to_string()))?,
            };
            write_export(cli, "graph-l0.json", &file)
        }
        ExportTarget::GraphLn => {
            let n = args
                .n
                .ok_or_else(|| Failure::Usage("graph-ln needs --n".into()))?;
            let file = GraphFile {
                ambient_dim: 2 * n,
                generators: graph_generators(&GraphFamilySpec::ln(n))
                    .map_err(|e| Failure::Usage(e.to_string()))?,
            };
            write_export(cli, &format!("graph-ln-{n}.json"), &file)
        }
    }
}

fn write_export(cli: &Cli, default_name: &str, value: &impl serde::Serialize) -> Result<(), Failure> {
    let text = if cli.pretty {
        serde_json::to_string_pretty(value)
    } else {
        serde_json::to_string(value)
    }
    .map_err(|e| Failure::Usage(format!("serialization failed: {e}")))?;
    let path = cli
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from(default_name));
    fs::write(&path, text.as_bytes())
        .map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display())))?;
    eprintln!("wrote {}", path.display());
    Ok(())
}

fn run_povm_check(args: &PovmCheckArgs, cli: &Cli) -> Result<(), Failure> {
    if args.starts == 0 {
        return Err(Failure::Usage("--starts must be at least 1".into()));
    }
    let obs: Observable = match &args.file {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
            match serde_json::from_str::<Observable>(&text) {
                Ok(obs) => obs,
                Err(e) => {
                    // distinguish malformed JSON (usage) from a well-formed
                    // observable failing validation (math)
                    if serde_json::from_str::<serde_json::Value>(&text).is_err() {
                        return Err(Failure::Usage(format!("malformed JSON: {e}")));
                    }
                    return Err(Failure::Math(vec![format!("observable_valid: {e}")]));
                }
            }
        }
        None => make_observable(povm_fixture().ops().to_vec())
            .map_err(|e| Failure::Math(vec![format!("observable_valid: {e}")]))?,
    };
    let report = find_indistinguishable(&obs, args.starts, args.seed)
        .map_err(|e| Failure::Usage(e.to_string()))?;
    let summary = json!({
        "schema": "1",
        "dim": obs.dim(),
        "outcomes": obs.outcomes(),
        "sharp": obs.is_sharp(),
        "violation": report,
        "indistinguishable_witness_found": report.best_value <= zerograph::tol::EXACT,
    });
    emit(cli, &summary)
}
