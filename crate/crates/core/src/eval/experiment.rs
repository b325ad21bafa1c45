//! Declarative experiment grids.
//!
//! A config names a graph generator and a list of `(M, T)` points. Each
//! point runs `repetitions` independent recoveries; repetition `r` of point
//! `k` simulates with seed `mix3(master_seed, k, r)`, so adding points
//! never changes the results of the others.
//!
//! With an output path the runner appends one CSV row per finished point
//! and keeps a JSON manifest next to it (`<output>.manifest.json`) holding
//! the config and every finished row. A rerun with the same config skips
//! the points already in the manifest.

use std::fs::{self, File, OpenOptions};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use log::{info, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{baseline_f1, score};
use crate::dynamics::simulate_ensemble;
use crate::error::{Error, Result};
use crate::graph::{gen_directed_gnp, gen_fixed_outdegree, load_edge_list, DirectedGraph};
use crate::recovery::{classifier_matrix_with, recover_graph, EpochWindow};
use crate::seed::{self, stream};

pub const RESULTS_CSV_VERSION: u32 = 1;
pub const RESULTS_CSV_HEADER: &str =
    "point_id,n,p_or_degrees,M,T,reps,mean_f1,median_f1,mean_consensus,exact_freq,baseline_f1,wall_ms";
const MANIFEST_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum GeneratorSpec {
    Gnp { n: usize, p: f64 },
    Outdeg { n: usize, degrees: Vec<usize> },
    EdgeList { path: PathBuf },
}

impl GeneratorSpec {
    fn build(&self, seed: u64) -> Result<DirectedGraph> {
        match self {
            GeneratorSpec::Gnp { n, p } => gen_directed_gnp(*n, *p, seed),
            GeneratorSpec::Outdeg { n, degrees } => gen_fixed_outdegree(*n, degrees, seed),
            GeneratorSpec::EdgeList { path } => Ok(load_edge_list(path)?.0),
        }
    }

    fn label(&self) -> String {
        match self {
            GeneratorSpec::Gnp { p, .. } => p.to_string(),
            GeneratorSpec::Outdeg { degrees, .. } => degrees.iter().map(|d| d.to_string()).collect::<Vec<_>>().join(";"),
            GeneratorSpec::EdgeList { path } => path
                .file_name()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default(),
        }
    }
}

/// Requested horizon of a grid point: a step count or `"until_consensus"`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Horizon {
    Steps(u64),
    Keyword(HorizonKeyword),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HorizonKeyword {
    UntilConsensus,
}

impl Horizon {
    pub const UNTIL_CONSENSUS: Horizon = Horizon::Keyword(HorizonKeyword::UntilConsensus);

    fn label(self) -> String {
        match self {
            Horizon::Steps(t) => t.to_string(),
            Horizon::Keyword(_) => "consensus".into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridPoint {
    #[serde(rename = "M")]
    pub m: usize,
    #[serde(rename = "T")]
    pub t: Horizon,
}

fn one() -> u64 {
    1
}

fn yes() -> bool {
    true
}

fn full_window() -> EpochWindow {
    EpochWindow::Full
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub generator: GeneratorSpec,
    pub grid: Vec<GridPoint>,
    pub repetitions: usize,
    #[serde(default = "one")]
    pub t_star: u64,
    pub master_seed: u64,
    #[serde(default)]
    pub graph_seed: u64,
    /// Draw a fresh graph for every repetition (seeded by repetition index,
    /// so all points see the same sequence of graphs).
    #[serde(default)]
    pub regenerate_graph: bool,
    /// Steps of each trajectory that feed the classifiers. Defaults to
    /// every step up to `T_m`, so runs to consensus use the whole
    /// trajectory; `"capped_at_n"` stops at `min{T_m, n}`.
    #[serde(default = "full_window")]
    pub window: EpochWindow,
    /// Step cap for `until_consensus` points; defaults to `20 n`.
    #[serde(default)]
    pub consensus_cap: Option<u64>,
    /// Wall-clock budget per point in seconds; repetitions not started in
    /// time mark the point as timed out.
    #[serde(default)]
    pub point_budget_secs: Option<f64>,
    /// Write measured `wall_ms`; `false` writes 0 so reruns are byte-identical.
    #[serde(default = "yes")]
    pub record_timing: bool,
    #[serde(default)]
    pub output: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let config: ExperimentConfig = serde_json::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.repetitions == 0 {
            return Err(Error::arg("repetitions must be at least 1"));
        }
        if self.grid.is_empty() {
            return Err(Error::arg("experiment grid is empty"));
        }
        if self.t_star == 0 {
            return Err(Error::arg("t_star must be at least 1"));
        }
        if let Some(k) = self.grid.iter().position(|g| g.m == 0) {
            return Err(Error::arg(format!("grid point {k} has M = 0")));
        }
        if self.point_budget_secs.is_some_and(|b| b.is_nan() || b <= 0.0) {
            return Err(Error::arg("point budget must be positive"));
        }
        Ok(())
    }

    /// The config with the output path removed, used to match manifests.
    fn identity(&self) -> ExperimentConfig {
        ExperimentConfig {
            output: None,
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PointStatus {
    Complete,
    Timeout,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub point_id: usize,
    pub n: usize,
    pub p_or_degrees: String,
    #[serde(rename = "M")]
    pub m: usize,
    #[serde(rename = "T")]
    pub t: String,
    pub reps: usize,
    pub status: PointStatus,
    /// Per-repetition F1 scores in repetition order.
    pub f1: Vec<f64>,
    pub mean_f1: Option<f64>,
    pub median_f1: Option<f64>,
    /// Mean consensus time over trajectories that reached consensus.
    pub mean_consensus: Option<f64>,
    pub exact_freq: Option<f64>,
    pub baseline_f1: f64,
    pub wall_ms: u64,
}

impl ResultRow {
    pub fn csv_line(&self) -> String {
        let metric = |v: Option<f64>| match (self.status, v) {
            (PointStatus::Timeout, _) => "timeout".to_string(),
            (PointStatus::Complete, Some(x)) => format!("{x:.6}"),
            (PointStatus::Complete, None) => "NA".to_string(),
        };
        format!(
            "{},{},{},{},{},{},{},{},{},{},{:.6},{}",
            self.point_id,
            self.n,
            self.p_or_degrees,
            self.m,
            self.t,
            self.reps,
            metric(self.mean_f1),
            metric(self.median_f1),
            metric(self.mean_consensus),
            metric(self.exact_freq),
            self.baseline_f1,
            self.wall_ms
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultsTable {
    pub rows: Vec<ResultRow>,
    /// `false` when the run stopped early (see [`RunOptions::max_points`]).
    pub complete: bool,
}

impl ResultsTable {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(RESULTS_CSV_HEADER);
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.csv_line());
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Overrides the config's output path.
    pub output: Option<PathBuf>,
    /// Stop after computing this many new points, leaving the manifest in
    /// the state an interrupted run would.
    pub max_points: Option<usize>,
}

#[derive(Debug, Serialize, Deserialize)]
struct Manifest {
    version: u32,
    config: ExperimentConfig,
    rows: Vec<ResultRow>,
}

fn manifest_path(csv: &Path) -> PathBuf {
    let mut name = csv.as_os_str().to_owned();
    name.push(".manifest.json");
    PathBuf::from(name)
}

fn write_manifest(path: &Path, manifest: &Manifest) -> Result<()> {
    let tmp = path.with_extension("tmp");
    {
        let mut out = BufWriter::new(File::create(&tmp)?);
        serde_json::to_writer_pretty(&mut out, manifest)?;
        out.write_all(b"\n")?;
        out.flush()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

/// Runs every grid point in order; see the module docs for seeding and
/// resumption.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ResultsTable> {
    run_experiment_with(config, &RunOptions::default())
}

pub fn run_experiment_with(config: &ExperimentConfig, options: &RunOptions) -> Result<ResultsTable> {
    config.validate()?;
    let output = options.output.clone().or_else(|| config.output.clone());

    let mut done: Vec<ResultRow> = Vec::new();
    let mut sink = None;
    if let Some(csv) = &output {
        let mpath = manifest_path(csv);
        if mpath.exists() {
            let manifest: Manifest = serde_json::from_str(&fs::read_to_string(&mpath)?)?;
            if manifest.version != MANIFEST_VERSION || manifest.config != config.identity() {
                return Err(Error::arg(format!(
                    "{} was written for a different config; remove it to start over",
                    mpath.display()
                )));
            }
            done = manifest.rows;
            info!("resuming: {} of {} points already done", done.len(), config.grid.len());
        }
        // rewrite the CSV from the manifest so a row written just before an
        // interruption is neither lost nor duplicated
        let mut file = BufWriter::new(File::create(csv)?);
        writeln!(file, "{RESULTS_CSV_HEADER}")?;
        for row in &done {
            writeln!(file, "{}", row.csv_line())?;
        }
        file.flush()?;
        let file = OpenOptions::new().append(true).open(csv)?;
        sink = Some((file, mpath));
    }

    let fixed_graph = if config.regenerate_graph {
        None
    } else {
        Some(config.generator.build(config.graph_seed)?)
    };
    let mut rows = done.clone();
    let mut computed = 0;
    let mut complete = true;
    for (point_id, point) in config.grid.iter().enumerate() {
        if done.iter().any(|r| r.point_id == point_id) {
            continue;
        }
        if options.max_points.is_some_and(|k| computed >= k) {
            complete = false;
            break;
        }
        let row = run_point(config, point_id, point, fixed_graph.as_ref()).map_err(|e| Error::Point {
            point_id,
            source: Box::new(e),
        })?;
        computed += 1;
        info!("point {point_id}: {}", row.csv_line());
        if let Some((file, mpath)) = &mut sink {
            writeln!(file, "{}", row.csv_line())?;
            file.flush()?;
            rows.push(row);
            rows.sort_by_key(|r| r.point_id);
            let manifest = Manifest {
                version: MANIFEST_VERSION,
                config: config.identity(),
                rows: rows.clone(),
            };
            write_manifest(mpath, &manifest)?;
        } else {
            rows.push(row);
        }
    }
    rows.sort_by_key(|r| r.point_id);
    if complete {
        if let Some(csv) = &output {
            // final CSV in grid order
            let table = ResultsTable { rows, complete };
            fs::write(csv, table.to_csv())?;
            return Ok(table);
        }
    }
    Ok(ResultsTable { rows, complete })
}

struct RepOutcome {
    f1: f64,
    exact: bool,
    consensus_times: Vec<u64>,
    baseline: f64,
}

fn run_point(
    config: &ExperimentConfig,
    point_id: usize,
    point: &GridPoint,
    fixed_graph: Option<&DirectedGraph>,
) -> Result<ResultRow> {
    let start = Instant::now();
    let outcomes: Vec<Option<RepOutcome>> = (0..config.repetitions)
        .into_par_iter()
        .map(|rep| {
            if let Some(budget) = config.point_budget_secs {
                if start.elapsed().as_secs_f64() > budget {
                    return Ok(None);
                }
            }
            let owned;
            let graph = match fixed_graph {
                Some(g) => g,
                None => {
                    owned = config
                        .generator
                        .build(seed::mix3(config.graph_seed, stream::GRAPH, rep as u64))?;
                    &owned
                }
            };
            let (horizon, stop) = match point.t {
                Horizon::Steps(t) => (t, true),
                Horizon::Keyword(_) => (config.consensus_cap.unwrap_or(20 * graph.n() as u64), true),
            };
            let rep_seed = seed::mix3(config.master_seed, point_id as u64, rep as u64);
            let ensemble = simulate_ensemble(graph, point.m, horizon, rep_seed, stop)?;
            let classifiers = classifier_matrix_with(&ensemble, config.t_star, config.window)?;
            let recovered = recover_graph(&classifiers)?;
            let metrics = score(&recovered.predicted, graph)?;
            Ok(Some(RepOutcome {
                f1: metrics.f1,
                exact: metrics.exact,
                consensus_times: ensemble.trajectories().iter().filter_map(|t| t.consensus_time()).collect(),
                baseline: baseline_f1(graph),
            }))
        })
        .collect::<Result<Vec<_>>>()?;
    let wall_ms = if config.record_timing {
        start.elapsed().as_millis() as u64
    } else {
        0
    };

    let n = match fixed_graph {
        Some(g) => g.n(),
        None => config.generator.build(config.graph_seed)?.n(),
    };
    let finished: Vec<&RepOutcome> = outcomes.iter().flatten().collect();
    let baseline = if finished.is_empty() {
        match fixed_graph {
            Some(g) => baseline_f1(g),
            None => f64::NAN,
        }
    } else {
        finished.iter().map(|o| o.baseline).sum::<f64>() / finished.len() as f64
    };
    let mut row = ResultRow {
        point_id,
        n,
        p_or_degrees: config.generator.label(),
        m: point.m,
        t: point.t.label(),
        reps: config.repetitions,
        status: PointStatus::Complete,
        f1: finished.iter().map(|o| o.f1).collect(),
        mean_f1: None,
        median_f1: None,
        mean_consensus: None,
        exact_freq: None,
        baseline_f1: baseline,
        wall_ms,
    };
    if finished.len() < config.repetitions {
        warn!(
            "point {point_id}: budget exhausted after {} of {} repetitions",
            finished.len(),
            config.repetitions
        );
        row.status = PointStatus::Timeout;
        return Ok(row);
    }
    let reps = finished.len() as f64;
    row.mean_f1 = Some(row.f1.iter().sum::<f64>() / reps);
    row.median_f1 = Some(median(&row.f1));
    row.exact_freq = Some(finished.iter().filter(|o| o.exact).count() as f64 / reps);
    let times: Vec<u64> = finished.iter().flat_map(|o| o.consensus_times.iter().copied()).collect();
    if !times.is_empty() {
        row.mean_consensus = Some(times.iter().sum::<u64>() as f64 / times.len() as f64);
    }
    Ok(row)
}

/// Median with the mean of the two middle values for even lengths.
pub(crate) fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let k = v.len();
    if k % 2 == 1 {
        v[k / 2]
    } else {
        0.5 * (v[k / 2 - 1] + v[k / 2])
    }
}
