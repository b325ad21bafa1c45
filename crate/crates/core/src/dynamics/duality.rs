//! Coalescing random walks, the dual of the voter model.
//!
//! Running the voter model backwards, the opinion of `i` at time `t` is the
//! initial opinion at the endpoint of a `t`-step walk that starts at `i` and
//! steps to a uniform out-neighbor. Two such walks merge on first meeting,
//! so `E[x_i^{(t)} x_j^{(t)}]` equals the probability that walks from `i`
//! and `j` meet within `t` steps. The two estimators here compute the two
//! sides independently.

use rayon::prelude::*;
use serde::Serialize;

use super::VoterProcess;
use crate::error::{Error, Result};
use crate::graph::DirectedGraph;
use crate::seed::{self, stream};

/// Monte-Carlo mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub mean: f64,
    pub std_error: f64,
    pub samples: usize,
}

impl Estimate {
    fn exact(value: f64) -> Self {
        Estimate {
            mean: value,
            std_error: 0.0,
            samples: 0,
        }
    }

    /// Mean and standard error of `samples` draws in `[-1, 1]` given their
    /// sum and sum of squares.
    fn from_sums(sum: i64, sum_sq: i64, samples: usize) -> Self {
        let k = samples as f64;
        let mean = sum as f64 / k;
        let var = if samples > 1 {
            ((sum_sq as f64 - k * mean * mean) / (k - 1.0)).max(0.0)
        } else {
            0.0
        };
        Estimate {
            mean,
            std_error: (var / k).sqrt(),
            samples,
        }
    }
}

fn check_vertices(graph: &DirectedGraph, i: usize, j: usize, samples: usize) -> Result<()> {
    let n = graph.n();
    if i >= n || j >= n {
        return Err(Error::arg(format!("vertex pair ({i}, {j}) out of range for n = {n}")));
    }
    if samples == 0 {
        return Err(Error::arg("need at least one sample"));
    }
    graph.require_out_neighbors()
}

/// Probability that walks from `i` and `j` meet within `t` steps.
///
/// Both walks step simultaneously, each to a uniform out-neighbor. Exactly
/// `1.0` without sampling when `i == j`.
pub fn meeting_probability(
    graph: &DirectedGraph,
    i: usize,
    j: usize,
    t: u64,
    n_samples: usize,
    seed: u64,
) -> Result<Estimate> {
    check_vertices(graph, i, j, n_samples)?;
    if i == j {
        return Ok(Estimate::exact(1.0));
    }
    let walk = seed::mix(seed, stream::WALK);
    let met: i64 = (0..n_samples)
        .into_par_iter()
        .map(|s| {
            let sample = seed::mix(walk, s as u64);
            let (mut a, mut b) = (i, j);
            for step in 0..t {
                let row = seed::mix(sample, step);
                let na = graph.out_neighbors(a);
                let nb = graph.out_neighbors(b);
                a = na[seed::below(seed::mix(row, 0), na.len())] as usize;
                b = nb[seed::below(seed::mix(row, 1), nb.len())] as usize;
                if a == b {
                    return 1;
                }
            }
            0
        })
        .sum();
    Ok(Estimate::from_sums(met, met, n_samples))
}

/// `E[x_i^{(t)} x_j^{(t)}]` from fresh forward simulations, one per
/// repetition. Exactly `1.0` when `i == j`.
pub fn opinion_correlation(
    graph: &DirectedGraph,
    i: usize,
    j: usize,
    t: u64,
    n_reps: usize,
    seed: u64,
) -> Result<Estimate> {
    check_vertices(graph, i, j, n_reps)?;
    if i == j {
        return Ok(Estimate::exact(1.0));
    }
    let products = (0..n_reps)
        .into_par_iter()
        .map(|r| {
            let mut process = VoterProcess::new(graph, seed::mix(seed, r as u64))?;
            while process.time() < t && !process.is_consensus() {
                process.step();
            }
            Ok((process.opinion(i) * process.opinion(j)) as i64)
        })
        .collect::<Result<Vec<i64>>>()?;
    let sum = products.iter().sum();
    Ok(Estimate::from_sums(sum, n_reps as i64, n_reps))
}
