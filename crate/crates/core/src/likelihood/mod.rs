//! Log-likelihood of candidate graphs and the flipping-graph statistics.
//!
//! Given trajectories, the probability that graph `G` produced them is,
//! up to factors not depending on `G`, the product over `(m, t < T_m, i)` of
//! `(d_i + x_{m,i}^{(t+1)} S_{m,i}^{(t)}) / d_i`, where
//! `S_{m,i}^{(t)} = Σ_{j ∈ N_i(G)} x_{m,j}^{(t)}`. Adding the prior weight
//! `log(p / (1 − p))` per edge gives
//!
//! ```text
//! L(G) = log(p/(1−p)) Σ_i d_i + Σ_m Σ_{t<T_m} Σ_i log(1 + x_i^{(t+1)} S_i^{(t)} / d_i)
//! ```
//!
//! which is `−∞` as soon as one factor vanishes.

mod triples;

use std::fmt;

use rayon::prelude::*;
use serde::{Serialize, Serializer};

pub use triples::{
    mle_failure_search, sample_triples, triple_stats, write_triple_stats_csv, FailureSearch, TripleSample, TripleStats,
};

use crate::bits;
use crate::dynamics::Ensemble;
use crate::error::{Error, Result};
use crate::graph::DirectedGraph;
use crate::sum::CompensatedSum;

/// A real number or `−∞`. Serialized as a JSON number or the string `"-inf"`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtReal {
    NegInf,
    Finite(f64),
}

impl ExtReal {
    pub fn is_finite(self) -> bool {
        matches!(self, ExtReal::Finite(_))
    }

    /// `f64::NEG_INFINITY` for [`ExtReal::NegInf`].
    pub fn to_f64(self) -> f64 {
        match self {
            ExtReal::NegInf => f64::NEG_INFINITY,
            ExtReal::Finite(x) => x,
        }
    }

    /// `self − other`, with `−∞ − x = −∞`. `None` when `other` is `−∞`.
    pub fn minus(self, other: ExtReal) -> Option<ExtReal> {
        match (self, other) {
            (_, ExtReal::NegInf) => None,
            (ExtReal::NegInf, _) => Some(ExtReal::NegInf),
            (ExtReal::Finite(a), ExtReal::Finite(b)) => Some(ExtReal::Finite(a - b)),
        }
    }
}

impl PartialOrd for ExtReal {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        self.to_f64().partial_cmp(&other.to_f64())
    }
}

impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtReal::NegInf => f.write_str("-inf"),
            ExtReal::Finite(x) => write!(f, "{x}"),
        }
    }
}

impl Serialize for ExtReal {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            ExtReal::NegInf => s.serialize_str("-inf"),
            ExtReal::Finite(x) => s.serialize_f64(*x),
        }
    }
}

/// `L(candidate)` on the observed trajectories.
///
/// Terms are added in the order `(m, t, i)` ascending: one compensated sum
/// per trajectory, then the per-trajectory totals in order of `m`. The
/// result does not depend on the thread count.
pub fn log_likelihood(candidate: &DirectedGraph, ensemble: &Ensemble, p_model: f64) -> Result<ExtReal> {
    if !(p_model > 0.0 && p_model < 1.0) {
        return Err(Error::arg(format!("model density {p_model} outside (0, 1)")));
    }
    let n = candidate.n();
    if ensemble.n() != n {
        return Err(Error::arg(format!(
            "candidate has n = {n}, ensemble has n = {}",
            ensemble.n()
        )));
    }
    candidate.require_out_neighbors()?;
    let masks = candidate.neighbor_masks();
    let degrees: Vec<i64> = (0..n).map(|i| candidate.out_degree(i) as i64).collect();

    let per_m: Vec<Option<f64>> = ensemble
        .trajectories()
        .par_iter()
        .map(|tr| {
            let mut acc = CompensatedSum::default();
            for t in 0..tr.effective_horizon() {
                let (now, next) = (tr.state(t), tr.state(t + 1));
                for i in 0..n {
                    let d = degrees[i];
                    let s = 2 * bits::count_and(&masks[i], now) as i64 - d;
                    let x = if bits::get(next, i) { 1 } else { -1 };
                    let k = d + x * s;
                    if k <= 0 {
                        return None;
                    }
                    acc.add((k as f64 / d as f64).ln());
                }
            }
            Some(acc.value())
        })
        .collect();

    let mut total = CompensatedSum::default();
    total.add((p_model / (1.0 - p_model)).ln() * candidate.edge_count() as f64);
    for value in per_m {
        match value {
            Some(v) => total.add(v),
            None => return Ok(ExtReal::NegInf),
        }
    }
    Ok(ExtReal::Finite(total.value()))
}

/// `G_abc`: `g` with edge `a → b` replaced by `a → c`. Every out-degree is
/// unchanged.
pub fn flipping_graph(g: &DirectedGraph, a: usize, b: usize, c: usize) -> Result<DirectedGraph> {
    check_triple(g, a, b, c)?;
    let mut adj = g.out_adjacency();
    let row = &mut adj[a];
    row.retain(|&j| j != b);
    let at = row.partition_point(|&j| j < c);
    row.insert(at, c);
    Ok(DirectedGraph::from_sorted_unchecked(g.n(), adj))
}

pub(crate) fn check_triple(g: &DirectedGraph, a: usize, b: usize, c: usize) -> Result<()> {
    let n = g.n();
    if a >= n || b >= n || c >= n {
        return Err(Error::arg(format!("triple ({a}, {b}, {c}) out of range for n = {n}")));
    }
    if a == b || a == c || b == c {
        return Err(Error::arg(format!("triple ({a}, {b}, {c}) is not distinct")));
    }
    if !g.has_edge(a, b) {
        return Err(Error::arg(format!("{a} -> {b} is not an edge")));
    }
    if g.has_edge(a, c) {
        return Err(Error::arg(format!("{a} -> {c} is already an edge")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{simulate_ensemble, simulate_from, Trajectory};
    use crate::graph::{gen_directed_gnp, gen_fixed_outdegree};

    #[test]
    fn two_cycle_by_hand() {
        // each factor is 1 + 1 = 2: L = 2 log(p/(1-p)) + 2T log 2
        let g = DirectedGraph::cycle(2);
        let horizon = 9;
        let tr = simulate_from(&g, &[1, -1], horizon, 3, true).unwrap();
        let e = Ensemble::new(vec![tr], None).unwrap();
        let p = 0.3f64;
        let want = 2.0 * (p / (1.0 - p)).ln() + 2.0 * horizon as f64 * 2f64.ln();
        match log_likelihood(&g, &e, p).unwrap() {
            ExtReal::Finite(v) => assert!((v - want).abs() < 1e-12, "{v} vs {want}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn impossible_data_is_neg_inf() {
        let g = DirectedGraph::cycle(2);
        // x_0^{(1)} must equal x_1^{(0)}
        let tr = Trajectory::from_opinions(&[vec![1, -1], vec![1, 1]]).unwrap();
        let e = Ensemble::new(vec![tr], None).unwrap();
        assert_eq!(log_likelihood(&g, &e, 0.5).unwrap(), ExtReal::NegInf);
        let sink = DirectedGraph::from_edges(2, &[(0, 1)]).unwrap();
        assert!(matches!(log_likelihood(&sink, &e, 0.5), Err(Error::InvalidGraph(_))));
        assert!(log_likelihood(&g, &e, 1.0).is_err());
    }

    #[test]
    fn ext_real_serializes_sentinel() {
        assert_eq!(serde_json::to_string(&ExtReal::NegInf).unwrap(), "\"-inf\"");
        assert_eq!(serde_json::to_string(&ExtReal::Finite(1.5)).unwrap(), "1.5");
        assert!(ExtReal::NegInf < ExtReal::Finite(-1e300));
        assert_eq!(ExtReal::NegInf.minus(ExtReal::Finite(2.0)), Some(ExtReal::NegInf));
        assert_eq!(ExtReal::Finite(1.0).minus(ExtReal::NegInf), None);
    }

    #[test]
    fn flip_examples() {
        let g = DirectedGraph::from_edges(3, &[(0, 1), (1, 2), (2, 0)]).unwrap();
        let f = flipping_graph(&g, 0, 1, 2).unwrap();
        assert_eq!(f.edges().collect::<Vec<_>>(), vec![(0, 2), (1, 2), (2, 0)]);
        assert_eq!(flipping_graph(&f, 0, 2, 1).unwrap(), g);
        assert!(flipping_graph(&g, 0, 2, 1).is_err());
        assert!(flipping_graph(&g, 0, 1, 1).is_err());
    }

    #[test]
    fn flips_preserve_degrees() {
        let g = gen_directed_gnp(200, 0.05, 3).unwrap();
        let sample = sample_triples(&g, 100, 7).unwrap();
        assert_eq!(sample.triples.len(), 100);
        for &(a, b, c) in &sample.triples {
            let f = flipping_graph(&g, a, b, c).unwrap();
            assert_eq!(f.edge_count(), g.edge_count());
            assert!((0..200).all(|i| f.out_degree(i) == g.out_degree(i)));
            assert!(f.has_edge(a, c) && !f.has_edge(a, b));
            assert_eq!(flipping_graph(&f, a, c, b).unwrap(), g);
        }
    }

    #[test]
    fn invariant_under_trajectory_order() {
        let g = gen_fixed_outdegree(40, &[3, 4], 1).unwrap();
        let e = simulate_ensemble(&g, 5, 60, 2, true).unwrap();
        let mut reversed = e.trajectories().to_vec();
        reversed.reverse();
        let r = Ensemble::new(reversed, None).unwrap();
        let a = log_likelihood(&g, &e, 0.1).unwrap().to_f64();
        let b = log_likelihood(&g, &r, 0.1).unwrap().to_f64();
        assert!(a.is_finite());
        assert!((a - b).abs() < 1e-9);
    }
}
