//! `votergraph`: generate graphs, simulate voter-model trajectories, recover
//! the graph and score the result.
//!
//! Machine-readable output goes to stdout, progress and the resolved
//! configuration to stderr (or `--log`). Exit codes: 0 success, 1 usage
//! error, 2 bad input data, 3 an experiment point ran out of time.

use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::{info, warn};

use votergraph::dynamics::{read_votr_file, simulate_ensemble, write_ensemble_csv, write_votr_file, Ensemble};
use votergraph::eval::{baseline_f1, run_experiment_with, score, ExperimentConfig, PointStatus, RunOptions};
use votergraph::graph::{
    check_admissibility, gen_directed_gnp, gen_fixed_outdegree, load_edge_list, save_edge_list,
    AdmissibilityOptions, DirectedGraph,
};
use votergraph::likelihood::{log_likelihood, mle_failure_search, write_triple_stats_csv};
use votergraph::recovery::{classifier_matrix_with, recover_graph, EpochWindow};
use votergraph::Error;

const VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), " (edge-list v1, VOTR v1, results CSV v1)");

#[derive(Debug, Parser)]
#[command(name = "votergraph", version = VERSION, about)]
struct Cli {
    /// Worker threads; defaults to the available parallelism. Results do
    /// not depend on this.
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Write log output to this file instead of stderr.
    #[arg(long, global = true)]
    log: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a random directed graph as an edge list.
    Generate(GenerateArgs),
    /// Simulate voter-model trajectories on a graph into a VOTR file.
    Simulate(SimulateArgs),
    /// Dump a VOTR file as CSV (m,t,vertex,opinion).
    Dump(DumpArgs),
    /// Recover the graph from trajectories by 2-clustering classifier rows.
    Recover(RecoverArgs),
    /// Score a predicted edge list against the true one (JSON on stdout).
    Evaluate(EvaluateArgs),
    /// Run an experiment grid from a JSON config; resumable.
    Experiment(ExperimentArgs),
    /// Per-triple flipping-graph statistics and the best likelihood-raising flip.
    Likelihood(LikelihoodArgs),
    /// Empirical admissibility diagnostics of a graph (JSON on stdout).
    Admissibility(AdmissibilityArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Model {
    Gnp,
    Outdeg,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Window {
    CappedAtN,
    Full,
}

impl From<Window> for EpochWindow {
    fn from(w: Window) -> Self {
        match w {
            Window::CappedAtN => EpochWindow::CappedAtN,
            Window::Full => EpochWindow::Full,
        }
    }
}

#[derive(Debug, Args)]
struct GenerateArgs {
    #[arg(long, value_enum)]
    model: Model,
    #[arg(long)]
    n: usize,
    /// Edge probability (gnp).
    #[arg(long, required_if_eq("model", "gnp"))]
    p: Option<f64>,
    /// Comma-separated out-degree choices (outdeg).
    #[arg(long, value_delimiter = ',', required_if_eq("model", "outdeg"))]
    degrees: Vec<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[arg(long)]
    graph: PathBuf,
    /// Number of independent trajectories.
    #[arg(long = "M", default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    m: u64,
    /// Steps per trajectory; the step cap with --until-consensus.
    #[arg(long = "T")]
    t: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Stop each trajectory at its first consensus.
    #[arg(long)]
    until_consensus: bool,
    #[arg(long)]
    out: PathBuf,
    /// Also write the trajectories read back from --out as CSV.
    #[arg(long)]
    dump_csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct DumpArgs {
    #[arg(long)]
    traj: PathBuf,
    /// CSV destination; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct RecoverArgs {
    #[arg(long)]
    traj: PathBuf,
    /// Spacing between the epochs of a trajectory.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    t_star: u64,
    /// Steps of each trajectory used: at most n (capped-at-n) or all up to T_m.
    #[arg(long, value_enum, default_value_t = Window::CappedAtN)]
    window: Window,
    /// Predicted edge list.
    #[arg(long)]
    out: PathBuf,
    /// JSON report with per-row margins and degenerate rows.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct EvaluateArgs {
    #[arg(long)]
    pred: PathBuf,
    #[arg(long)]
    truth: PathBuf,
}

#[derive(Debug, Args)]
struct ExperimentArgs {
    #[arg(long)]
    config: PathBuf,
    /// Results CSV; overrides the config's `output`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Stop after this many new grid points (rerun to continue).
    #[arg(long)]
    max_points: Option<usize>,
}

#[derive(Debug, Args)]
struct LikelihoodArgs {
    /// The true graph the trajectories were simulated on.
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    traj: PathBuf,
    /// Model edge density for the prior term of the reported log-likelihood.
    #[arg(long)]
    p: f64,
    /// Number of sampled triples (at most one per vertex).
    #[arg(long, default_value_t = 100)]
    triples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Per-triple CSV; stdout when omitted (the summary then goes to the log).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct AdmissibilityArgs {
    #[arg(long)]
    graph: PathBuf,
    /// Model edge density the degree bounds are measured against.
    #[arg(long)]
    p: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 20)]
    mixing_steps: usize,
    #[arg(long, default_value_t = 10)]
    consensus_reps: usize,
    #[arg(long, default_value_t = 16)]
    partition_samples: usize,
}

/// Failure of a subcommand, carrying its exit code.
enum Failure {
    Usage(String),
    Data(String),
    Timeout(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e.root() {
            Error::InvalidArgument(_) => Failure::Usage(e.to_string()),
            _ => Failure::Data(e.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Data(e.to_string())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Data(e.to_string())
    }
}

type CmdResult = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Err(msg) = init_logging(cli.log.as_deref()) {
        eprintln!("error: {msg}");
        return ExitCode::from(1);
    }
    if let Some(threads) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    info!("votergraph {VERSION}");
    info!("threads: {}", rayon::current_num_threads());
    info!("resolved invocation: {:?}", cli.command);

    let result = match &cli.command {
        Command::Generate(a) => generate(a),
        Command::Simulate(a) => simulate(a),
        Command::Dump(a) => dump(a),
        Command::Recover(a) => recover(a),
        Command::Evaluate(a) => evaluate(a),
        Command::Experiment(a) => experiment(a),
        Command::Likelihood(a) => likelihood(a),
        Command::Admissibility(a) => admissibility(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Data(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Timeout(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}

fn init_logging(path: Option<&Path>) -> Result<(), String> {
    let mut builder = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"));
    if let Some(path) = path {
        let file = File::create(path).map_err(|e| format!("cannot open log file {}: {e}", path.display()))?;
        builder.target(env_logger::Target::Pipe(Box::new(file)));
    }
    builder.init();
    Ok(())
}

fn load_graph(path: &Path) -> Result<DirectedGraph, Failure> {
    let (graph, warnings) = load_edge_list(path).map_err(|e| Failure::Data(format!("{}: {e}", path.display())))?;
    if warnings.self_loops_dropped + warnings.duplicates_dropped > 0 {
        warn!(
            "{}: dropped {} self-loops and {} duplicate edges",
            path.display(),
            warnings.self_loops_dropped,
            warnings.duplicates_dropped
        );
    }
    info!("{}: n = {}, {} edges", path.display(), graph.n(), graph.edge_count());
    Ok(graph)
}

fn load_ensemble(path: &Path) -> Result<Ensemble, Failure> {
    let ensemble = read_votr_file(path).map_err(|e| Failure::Data(format!("{}: {e}", path.display())))?;
    info!(
        "{}: n = {}, M = {}, T = {}",
        path.display(),
        ensemble.n(),
        ensemble.len(),
        ensemble.horizon()
    );
    Ok(ensemble)
}

fn out_or_stdout(path: Option<&Path>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(File::create(p)?),
        None => Box::new(io::stdout().lock()),
    })
}

fn generate(a: &GenerateArgs) -> CmdResult {
    let graph = match a.model {
        Model::Gnp => gen_directed_gnp(a.n, a.p.expect("clap enforces --p"), a.seed)?,
        Model::Outdeg => gen_fixed_outdegree(a.n, &a.degrees, a.seed)?,
    };
    save_edge_list(&graph, &a.out)?;
    println!("{}", graph.edge_count());
    Ok(())
}

fn simulate(a: &SimulateArgs) -> CmdResult {
    let graph = load_graph(&a.graph)?;
    info!("master seed {}, trajectory m uses mix(master, m)", a.seed);
    let ensemble = simulate_ensemble(&graph, a.m as usize, a.t, a.seed, a.until_consensus)?;
    write_votr_file(&ensemble, &a.out)?;
    if let Some(csv) = &a.dump_csv {
        let back = load_ensemble(&a.out)?;
        write_ensemble_csv(&back, File::create(csv)?)?;
    }
    let mut out = io::stdout().lock();
    writeln!(out, "m,effective_horizon,reached_consensus")?;
    for (m, tr) in ensemble.trajectories().iter().enumerate() {
        writeln!(out, "{m},{},{}", tr.effective_horizon(), tr.reached_consensus())?;
    }
    let reached = ensemble.trajectories().iter().filter(|t| t.reached_consensus()).count();
    info!("{reached} of {} trajectories reached consensus", ensemble.len());
    Ok(())
}

fn dump(a: &DumpArgs) -> CmdResult {
    let ensemble = load_ensemble(&a.traj)?;
    write_ensemble_csv(&ensemble, out_or_stdout(a.out.as_deref())?)?;
    Ok(())
}

fn recover(a: &RecoverArgs) -> CmdResult {
    let ensemble = load_ensemble(&a.traj)?;
    let classifiers = classifier_matrix_with(&ensemble, a.t_star, a.window.into())?;
    let result = recover_graph(&classifiers)?;
    save_edge_list(&result.predicted, &a.out)?;
    let report = result.report(&classifiers);
    if !report.degenerate_rows.is_empty() {
        warn!("{} rows had identical scores and were left empty", report.degenerate_rows.len());
    }
    if let Some(path) = &a.report {
        let mut file = File::create(path)?;
        serde_json::to_writer_pretty(&mut file, &report)?;
        writeln!(file)?;
    }
    println!("{}", result.predicted.edge_count());
    Ok(())
}

fn evaluate(a: &EvaluateArgs) -> CmdResult {
    let pred = load_graph(&a.pred)?;
    let truth = load_graph(&a.truth)?;
    let metrics = score(&pred, &truth)?;
    info!("baseline F1 of the truth: {:.4}", baseline_f1(&truth));
    println!("{}", serde_json::to_string(&metrics)?);
    Ok(())
}

fn experiment(a: &ExperimentArgs) -> CmdResult {
    let config = ExperimentConfig::load(&a.config)?;
    info!("experiment config: {}", serde_json::to_string(&config)?);
    let options = RunOptions {
        output: a.out.clone(),
        max_points: a.max_points,
    };
    let table = run_experiment_with(&config, &options)?;
    if options.output.is_none() && config.output.is_none() {
        print!("{}", table.to_csv());
    }
    let timed_out: Vec<usize> = table
        .rows
        .iter()
        .filter(|r| r.status == PointStatus::Timeout)
        .map(|r| r.point_id)
        .collect();
    if !timed_out.is_empty() {
        return Err(Failure::Timeout(format!("grid points {timed_out:?} exceeded their time budget")));
    }
    if !table.complete {
        info!("stopped after {} of {} points", table.rows.len(), config.grid.len());
    }
    Ok(())
}

fn likelihood(a: &LikelihoodArgs) -> CmdResult {
    let graph = load_graph(&a.graph)?;
    let ensemble = load_ensemble(&a.traj)?;
    let truth_ll = log_likelihood(&graph, &ensemble, a.p)?;
    let search = mle_failure_search(&graph, &ensemble, a.triples, a.seed)?;
    let summary = serde_json::json!({
        "log_likelihood_truth": truth_ll,
        "triples": search.stats.len(),
        "skipped_vertices": search.skipped,
        "witness": search.witness,
        "best": search.best_stats(),
    });
    let verdict = if search.witness {
        "positive-delta witness found"
    } else {
        "no positive-delta witness"
    };
    match &a.out {
        Some(path) => {
            write_triple_stats_csv(&search.stats, File::create(path)?)?;
            println!("{}", serde_json::to_string(&summary)?);
        }
        None => {
            write_triple_stats_csv(&search.stats, io::stdout().lock())?;
            info!("summary: {summary}");
        }
    }
    info!("{verdict}");
    Ok(())
}

fn admissibility(a: &AdmissibilityArgs) -> CmdResult {
    let graph = load_graph(&a.graph)?;
    let options = AdmissibilityOptions {
        mixing_steps: a.mixing_steps,
        consensus_reps: a.consensus_reps,
        partition_samples: a.partition_samples,
        seed: a.seed,
        ..AdmissibilityOptions::default()
    };
    let report = check_admissibility(&graph, a.p, &options)?;
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(())
}
