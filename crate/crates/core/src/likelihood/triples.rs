//! Per-triple statistics of the flip `a → b` ⇒ `a → c`.
//!
//! For each observed step `(m, t < T_m)` let
//!
//! ```text
//! X = x_a^{(t+1)} (x_c^{(t)} − x_b^{(t)}) / (d_a + x_a^{(t+1)} S_a^{(t)})
//! ```
//!
//! with `S_a` taken over `N_a` in the true graph. Only the factor of vertex
//! `a` changes under the flip, and it changes by `1 + X`, so
//! `L(G_abc) − L(G) = Σ log(1 + X)`. A triple is bad when some `X = −1`:
//! the flipped graph then gives the data probability zero.

use std::io::Write;

use log::warn;
use rayon::prelude::*;
use serde::Serialize;

use super::{check_triple, ExtReal};
use crate::bits;
use crate::dynamics::Ensemble;
use crate::error::{Error, Result};
use crate::graph::DirectedGraph;
use crate::seed::{self, stream};
use crate::sum::CompensatedSum;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TripleStats {
    pub a: usize,
    pub b: usize,
    pub c: usize,
    pub is_good: bool,
    /// `Σ X` over all observed steps.
    pub sum_x: f64,
    /// `Σ X²` over all observed steps.
    pub sum_x_sq: f64,
    /// `L(G_abc) − L(G)`; `−∞` for bad triples.
    pub delta_log_likelihood: ExtReal,
    /// Observed steps `Σ_m T_m`.
    pub terms: u64,
}

pub fn triple_stats(g_true: &DirectedGraph, ensemble: &Ensemble, a: usize, b: usize, c: usize) -> Result<TripleStats> {
    check_triple(g_true, a, b, c)?;
    if ensemble.n() != g_true.n() {
        return Err(Error::arg(format!(
            "graph has n = {}, ensemble has n = {}",
            g_true.n(),
            ensemble.n()
        )));
    }
    let mut mask = vec![0u64; bits::words_for(g_true.n())];
    for &j in g_true.out_neighbors(a) {
        bits::set(&mut mask, j as usize);
    }
    stats_with_mask(g_true, &mask, ensemble, a, b, c)
}

fn stats_with_mask(
    g_true: &DirectedGraph,
    mask: &[u64],
    ensemble: &Ensemble,
    a: usize,
    b: usize,
    c: usize,
) -> Result<TripleStats> {
    let d = g_true.out_degree(a) as i64;
    let mut sum_x = CompensatedSum::default();
    let mut sum_x_sq = CompensatedSum::default();
    let mut delta = CompensatedSum::default();
    let mut is_good = true;
    let mut terms = 0u64;
    let opinion = |state: &[u64], v: usize| if bits::get(state, v) { 1i64 } else { -1 };
    for (m, tr) in ensemble.trajectories().iter().enumerate() {
        for t in 0..tr.effective_horizon() {
            terms += 1;
            let (now, next) = (tr.state(t), tr.state(t + 1));
            let x = opinion(next, a);
            let num = x * (opinion(now, c) - opinion(now, b));
            if num == 0 {
                continue;
            }
            let den = d + x * (2 * bits::count_and(mask, now) as i64 - d);
            if den == 0 {
                return Err(Error::data(format!(
                    "trajectory {m} step {t}: vertex {a} copies an opinion none of its neighbors hold"
                )));
            }
            let value = num as f64 / den as f64;
            sum_x.add(value);
            sum_x_sq.add(value * value);
            if num + den == 0 {
                is_good = false;
            } else {
                delta.add((1.0 + value).ln());
            }
        }
    }
    Ok(TripleStats {
        a,
        b,
        c,
        is_good,
        sum_x: sum_x.value(),
        sum_x_sq: sum_x_sq.value(),
        delta_log_likelihood: if is_good {
            ExtReal::Finite(delta.value())
        } else {
            ExtReal::NegInf
        },
        terms,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TripleSample {
    pub triples: Vec<(usize, usize, usize)>,
    /// Vertices passed over because every or no other vertex is a neighbor.
    pub skipped: Vec<usize>,
}

/// Draws up to `count` triples with `a = 0, 1, 2, ...`, `b` uniform in
/// `N_a` and `c` uniform among the other non-neighbors of `a`.
///
/// A vertex with out-degree `0` or `n − 1` admits no triple; it is skipped
/// and the next vertex id takes its place. Fewer than `count` triples are
/// returned only when the vertices run out.
pub fn sample_triples(g: &DirectedGraph, count: usize, seed: u64) -> Result<TripleSample> {
    let n = g.n();
    if count > n {
        return Err(Error::arg(format!("cannot sample {count} triples from {n} vertices")));
    }
    let base = seed::mix(seed, stream::TRIPLE);
    let mut triples = Vec::with_capacity(count);
    let mut skipped = Vec::new();
    for a in 0..n {
        if triples.len() == count {
            break;
        }
        let nbrs = g.out_neighbors(a);
        let d = nbrs.len();
        if d == 0 || d == n - 1 {
            skipped.push(a);
            continue;
        }
        let draw = seed::mix(base, a as u64);
        let b = nbrs[seed::below(seed::mix(draw, 0), d)] as usize;
        let k = seed::below(seed::mix(draw, 1), n - 1 - d);
        let c = (0..n)
            .filter(|&v| v != a && nbrs.binary_search(&(v as u32)).is_err())
            .nth(k)
            .expect("non-neighbor count is n - 1 - d");
        triples.push((a, b, c));
    }
    if !skipped.is_empty() {
        warn!(
            "skipped {} vertices with empty or full out-neighborhood: {:?}",
            skipped.len(),
            skipped
        );
    }
    Ok(TripleSample { triples, skipped })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FailureSearch {
    /// Every evaluated triple, in sampling order.
    pub stats: Vec<TripleStats>,
    /// Index into `stats` of the largest `delta_log_likelihood` (first on ties).
    pub best: Option<usize>,
    /// Whether some flipped graph has strictly larger likelihood than the truth.
    pub witness: bool,
    pub skipped: Vec<usize>,
}

impl FailureSearch {
    pub fn best_stats(&self) -> Option<&TripleStats> {
        self.best.map(|k| &self.stats[k])
    }
}

/// Evaluates `n_triples` sampled flips of `g_true` and reports the one that
/// raises the likelihood the most.
pub fn mle_failure_search(g_true: &DirectedGraph, ensemble: &Ensemble, n_triples: usize, seed: u64) -> Result<FailureSearch> {
    if ensemble.n() != g_true.n() {
        return Err(Error::arg(format!(
            "graph has n = {}, ensemble has n = {}",
            g_true.n(),
            ensemble.n()
        )));
    }
    let sample = sample_triples(g_true, n_triples, seed)?;
    let masks = g_true.neighbor_masks();
    let stats = sample
        .triples
        .par_iter()
        .map(|&(a, b, c)| stats_with_mask(g_true, &masks[a], ensemble, a, b, c))
        .collect::<Result<Vec<_>>>()?;
    let mut best: Option<usize> = None;
    for (k, s) in stats.iter().enumerate() {
        if best.is_none_or(|j| s.delta_log_likelihood > stats[j].delta_log_likelihood) {
            best = Some(k);
        }
    }
    let witness = best.is_some_and(|k| stats[k].delta_log_likelihood > ExtReal::Finite(0.0));
    Ok(FailureSearch {
        stats,
        best,
        witness,
        skipped: sample.skipped,
    })
}

/// CSV with header `a,b,c,is_good,sum_x,sum_x_sq,delta`; `delta` is
/// `-inf` for bad triples.
pub fn write_triple_stats_csv<W: Write>(stats: &[TripleStats], mut out: W) -> Result<()> {
    writeln!(out, "a,b,c,is_good,sum_x,sum_x_sq,delta")?;
    for s in stats {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            s.a, s.b, s.c, s.is_good, s.sum_x, s.sum_x_sq, s.delta_log_likelihood
        )?;
    }
    out.flush()?;
    Ok(())
}
