//! Empirical audit of the structural properties that make a graph
//! "admissible" for recovery: degree and co-degree concentration, fast
//! mixing of the random walk, linear consensus time and edge expansion.
//!
//! The expansion property quantifies over every bipartition of the vertex
//! set, which is exponential; it is audited on sampled partitions only and
//! the report says so.

use rayon::prelude::*;
use serde::Serialize;

use super::stationary::walk_step;
use super::{stationary_distribution, DirectedGraph};
use crate::bits;
use crate::dynamics::simulate_trajectory;
use crate::error::{Error, Result};
use crate::seed::{self, stream};

#[derive(Debug, Clone, Serialize)]
pub struct AdmissibilityOptions {
    /// Largest `t` for which `max_i TV(π_{t,i}, π)` is reported.
    pub mixing_steps: usize,
    /// Number of walk start vertices (capped at `n`).
    pub walk_samples: usize,
    pub consensus_reps: usize,
    /// Simulations longer than this are cut off and counted as capped.
    /// Defaults to `100 n` when `None`.
    pub consensus_cap: Option<u64>,
    pub partition_samples: usize,
    pub seed: u64,
}

impl Default for AdmissibilityOptions {
    fn default() -> Self {
        Self {
            mixing_steps: 20,
            walk_samples: 64,
            consensus_reps: 10,
            consensus_cap: None,
            partition_samples: 16,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundCheck {
    pub ok: bool,
    /// Largest measured deviation (or raw value, for one-sided bounds).
    pub worst_deviation: f64,
    pub bound: f64,
    pub regime: &'static str,
}

#[derive(Debug, Clone, Serialize)]
pub struct MixingReport {
    pub skipped: Option<String>,
    pub start_vertices: usize,
    /// `(t, max_i TV(π_{t,i}, π))` for `t = 1..=mixing_steps`.
    pub tv: Vec<(usize, f64)>,
    /// `max_i |n π(i) − 1|`.
    pub stationary_deviation: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConsensusEstimate {
    pub skipped: Option<String>,
    pub reps: usize,
    pub capped_runs: usize,
    pub mean_time: f64,
    /// `mean_time / n`, an estimate of the linear-consensus constant.
    pub mean_time_over_n: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExpansionSample {
    /// `None` for the deterministic balanced bisection.
    pub partition_seed: Option<u64>,
    pub x_size: usize,
    pub y_size: usize,
    pub triples: u64,
    pub bound: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct AdmissibilityReport {
    pub degree_bound: BoundCheck,
    pub overlap_bound: BoundCheck,
    pub mixing_tv: MixingReport,
    pub consensus_estimate: ConsensusEstimate,
    pub expansion_samples: Vec<ExpansionSample>,
    /// Always `"sampled, not exhaustive"`.
    pub expansion_mode: &'static str,
}

pub fn check_admissibility(
    graph: &DirectedGraph,
    p_model: f64,
    options: &AdmissibilityOptions,
) -> Result<AdmissibilityReport> {
    if !(p_model > 0.0 && p_model <= 1.0) {
        return Err(Error::arg(format!("model probability {p_model} outside (0, 1]")));
    }
    if graph.n() < 2 {
        return Err(Error::arg("admissibility needs n >= 2"));
    }
    Ok(AdmissibilityReport {
        degree_bound: degree_check(graph, p_model),
        overlap_bound: overlap_check(graph, p_model),
        mixing_tv: mixing_check(graph, options),
        consensus_estimate: consensus_check(graph, options),
        expansion_samples: expansion_check(graph, p_model, options),
        expansion_mode: "sampled, not exhaustive",
    })
}

fn degree_check(graph: &DirectedGraph, p: f64) -> BoundCheck {
    let n = graph.n() as f64;
    let np = n * p;
    let bound = (10.0 * np * n.ln()).sqrt();
    let worst = (0..graph.n())
        .flat_map(|i| [graph.out_degree(i), graph.in_degree(i)])
        .map(|d| (d as f64 - np).abs())
        .fold(0.0, f64::max);
    BoundCheck {
        ok: worst <= bound,
        worst_deviation: worst,
        bound,
        regime: "in/out degree",
    }
}

fn overlap_check(graph: &DirectedGraph, p: f64) -> BoundCheck {
    let n = graph.n();
    let log_n = (n as f64).ln();
    let np2 = n as f64 * p * p;
    let concentrated = np2 >= log_n.powi(4);
    let masks = graph.neighbor_masks();
    let worst = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut worst = 0.0f64;
            for j in (0..n).filter(|&j| j != i) {
                let overlap = bits::count_and(&masks[i], &masks[j]) as f64;
                let dev = if concentrated { (overlap - np2).abs() } else { overlap };
                worst = worst.max(dev);
            }
            worst
        })
        .reduce(|| 0.0, f64::max);
    let (bound, regime) = if concentrated {
        ((10.0 * np2 * log_n).sqrt(), "concentrated")
    } else {
        (4.0 * log_n.powi(4), "sparse")
    };
    BoundCheck {
        ok: worst <= bound,
        worst_deviation: worst,
        bound,
        regime,
    }
}

fn connectivity_skip(graph: &DirectedGraph) -> Option<String> {
    if graph.require_out_neighbors().is_err() {
        Some("graph has a vertex with out-degree 0".into())
    } else if !graph.is_strongly_connected() {
        Some("graph is not strongly connected".into())
    } else {
        None
    }
}

fn sample_starts(n: usize, count: usize, seed: u64) -> Vec<usize> {
    if count >= n {
        return (0..n).collect();
    }
    // partial Fisher–Yates driven by the counter-based mixer
    let mut ids: Vec<usize> = (0..n).collect();
    for k in 0..count {
        let r = k + seed::below(seed::mix3(seed, stream::WALK, k as u64), n - k);
        ids.swap(k, r);
    }
    let mut starts = ids[..count].to_vec();
    starts.sort_unstable();
    starts
}

fn mixing_check(graph: &DirectedGraph, options: &AdmissibilityOptions) -> MixingReport {
    let skipped = connectivity_skip(graph);
    let empty = MixingReport {
        skipped: skipped.clone(),
        start_vertices: 0,
        tv: Vec::new(),
        stationary_deviation: f64::NAN,
    };
    if skipped.is_some() {
        return empty;
    }
    let pi = match stationary_distribution(graph, 1e-12, 1_000_000) {
        Ok(pi) => pi,
        Err(e) => {
            return MixingReport {
                skipped: Some(format!("stationary distribution failed: {e}")),
                ..empty
            }
        }
    };
    let n = graph.n();
    let stationary_deviation = pi
        .iter()
        .map(|&x| (n as f64 * x - 1.0).abs())
        .fold(0.0, f64::max);
    let starts = sample_starts(n, options.walk_samples.max(1), options.seed);
    let steps = options.mixing_steps;
    let per_start: Vec<Vec<f64>> = starts
        .par_iter()
        .map(|&start| {
            let mut dist = vec![0.0; n];
            dist[start] = 1.0;
            let mut next = vec![0.0; n];
            (0..steps)
                .map(|_| {
                    walk_step(graph, &dist, &mut next);
                    std::mem::swap(&mut dist, &mut next);
                    0.5 * dist.iter().zip(&pi).map(|(a, b)| (a - b).abs()).sum::<f64>()
                })
                .collect()
        })
        .collect();
    let tv = (0..steps)
        .map(|k| {
            let worst = per_start.iter().map(|v| v[k]).fold(0.0, f64::max);
            (k + 1, worst.clamp(0.0, 1.0))
        })
        .collect();
    MixingReport {
        skipped: None,
        start_vertices: starts.len(),
        tv,
        stationary_deviation,
    }
}

fn consensus_check(graph: &DirectedGraph, options: &AdmissibilityOptions) -> ConsensusEstimate {
    let skipped = connectivity_skip(graph);
    if skipped.is_some() || options.consensus_reps == 0 {
        return ConsensusEstimate {
            skipped: skipped.or(Some("consensus_reps = 0".into())),
            reps: 0,
            capped_runs: 0,
            mean_time: f64::NAN,
            mean_time_over_n: f64::NAN,
        };
    }
    let n = graph.n();
    let cap = options.consensus_cap.unwrap_or(100 * n as u64);
    let times: Vec<Option<u64>> = (0..options.consensus_reps)
        .into_par_iter()
        .map(|r| {
            let s = seed::mix3(options.seed, stream::CONSENSUS, r as u64);
            simulate_trajectory(graph, cap, s, true)
                .expect("out-degrees checked above")
                .consensus_time()
        })
        .collect();
    let capped_runs = times.iter().filter(|t| t.is_none()).count();
    // capped runs enter at the cap, making the mean a lower bound
    let mean_time = times.iter().map(|t| t.unwrap_or(cap) as f64).sum::<f64>() / times.len() as f64;
    ConsensusEstimate {
        skipped: None,
        reps: times.len(),
        capped_runs,
        mean_time,
        mean_time_over_n: mean_time / n as f64,
    }
}

fn expansion_sample(graph: &DirectedGraph, p: f64, in_x: &[bool], partition_seed: Option<u64>) -> ExpansionSample {
    let n = graph.n();
    let x_size = in_x.iter().filter(|&&b| b).count();
    let y_size = n - x_size;
    // Σ_i |N_i ∩ X| · |N_i ∩ Y| counts triples (i, j, j') with j ∈ X, j' ∈ Y.
    let triples: u64 = (0..n)
        .map(|i| {
            let nbrs = graph.out_neighbors(i);
            let xs = nbrs.iter().filter(|&&j| in_x[j as usize]).count() as u64;
            xs * (nbrs.len() as u64 - xs)
        })
        .sum();
    let bound = n as f64 * p * p * x_size as f64 * y_size as f64 / 1e12;
    ExpansionSample {
        partition_seed,
        x_size,
        y_size,
        triples,
        bound,
        ratio: triples as f64 / bound,
    }
}

fn expansion_check(graph: &DirectedGraph, p: f64, options: &AdmissibilityOptions) -> Vec<ExpansionSample> {
    let n = graph.n();
    let bisection: Vec<bool> = (0..n).map(|i| i < n / 2).collect();
    let mut samples = vec![expansion_sample(graph, p, &bisection, None)];
    let base = seed::mix(options.seed, stream::PARTITION);
    samples.extend((0..options.partition_samples).map(|k| {
        // redraw until both sides are non-empty
        let mut attempt = 0u64;
        loop {
            let s = seed::mix3(base, k as u64, attempt);
            let in_x: Vec<bool> = (0..n).map(|i| seed::mix(s, i as u64) >> 63 == 1).collect();
            let xs = in_x.iter().filter(|&&b| b).count();
            if xs > 0 && xs < n {
                break expansion_sample(graph, p, &in_x, Some(s));
            }
            attempt += 1;
        }
    }));
    samples
}
