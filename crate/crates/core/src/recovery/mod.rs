//! Graph recovery from voter-model trajectories.
//!
//! Vertex `i` copies from its out-neighbors, so `x_i^{(t+1)}` correlates
//! with `x_j^{(t)}` more strongly when `j ∈ N_i`. [`recover_graph`]
//! clusters each row of the [`ClassifierMatrix`] into a high and a low
//! group and predicts the high group as `N_i`. [`threshold_recover_t1`] is
//! the one-step baseline with a fixed threshold.

mod classifier;
mod cluster;

use rayon::prelude::*;
use serde::Serialize;

pub use classifier::{classifier_matrix, classifier_matrix_with, ClassifierMatrix, EpochWindow};
pub use cluster::{two_clus, Partition2};

use crate::dynamics::Ensemble;
use crate::error::{Error, Result};
use crate::graph::DirectedGraph;

#[derive(Debug, Clone, PartialEq)]
pub struct RecoveryResult {
    pub predicted: DirectedGraph,
    /// Cluster margin per row; `0.0` for degenerate rows.
    pub per_row_margin: Vec<f64>,
    /// Rows whose off-diagonal scores were all equal; predicted empty.
    pub degenerate_rows: Vec<usize>,
}

/// JSON-facing summary of a [`RecoveryResult`].
#[derive(Debug, Clone, Serialize)]
pub struct RecoveryReport<'a> {
    pub n: usize,
    pub edge_count: usize,
    pub t_star: u64,
    pub max_epochs: u64,
    pub trajectories: usize,
    pub per_row_margin: &'a [f64],
    pub degenerate_rows: &'a [usize],
    /// Non-degenerate rows whose split is not a strict 2-clustering.
    pub ambiguous_rows: Vec<usize>,
}

impl RecoveryResult {
    pub fn report<'a>(&'a self, classifiers: &ClassifierMatrix) -> RecoveryReport<'a> {
        let ambiguous_rows = self
            .per_row_margin
            .iter()
            .enumerate()
            .filter(|&(i, &m)| m <= 0.0 && self.degenerate_rows.binary_search(&i).is_err())
            .map(|(i, _)| i)
            .collect();
        RecoveryReport {
            n: self.predicted.n(),
            edge_count: self.predicted.edge_count(),
            t_star: classifiers.t_star(),
            max_epochs: classifiers.max_epochs(),
            trajectories: classifiers.trajectories(),
            per_row_margin: &self.per_row_margin,
            degenerate_rows: &self.degenerate_rows,
            ambiguous_rows,
        }
    }
}

/// Runs 2-clustering on every row `{S_{i→j} : j ≠ i}` and predicts the
/// high group as the out-neighborhood of `i`. The diagonal is never
/// clustered since the model has no self-loops.
pub fn recover_graph(classifiers: &ClassifierMatrix) -> Result<RecoveryResult> {
    let n = classifiers.n();
    if n < 3 {
        return Err(Error::arg(format!("recovery needs n >= 3, got {n}")));
    }
    // per row: predicted neighbors and margin, or None when degenerate
    type Row = Option<(Vec<usize>, f64)>;
    let rows: Vec<Result<Row>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let values: Vec<f64> = classifiers
                .row(i)
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, &s)| s as f64)
                .collect();
            match two_clus(&values) {
                Ok(part) => {
                    let mut nbrs: Vec<usize> = part.high.iter().map(|&k| if k >= i { k + 1 } else { k }).collect();
                    nbrs.sort_unstable();
                    Ok(Some((nbrs, part.gap)))
                }
                Err(Error::Degenerate) => Ok(None),
                Err(e) => Err(e),
            }
        })
        .collect();

    let mut adj = Vec::with_capacity(n);
    let mut per_row_margin = Vec::with_capacity(n);
    let mut degenerate_rows = Vec::new();
    for (i, row) in rows.into_iter().enumerate() {
        match row? {
            Some((nbrs, gap)) => {
                adj.push(nbrs);
                per_row_margin.push(gap);
            }
            None => {
                adj.push(Vec::new());
                per_row_margin.push(0.0);
                degenerate_rows.push(i);
            }
        }
    }
    Ok(RecoveryResult {
        predicted: DirectedGraph::from_sorted_unchecked(n, adj),
        per_row_margin,
        degenerate_rows,
    })
}

/// One-step thresholding baseline.
///
/// Uses only the pair `(x^{(1)}, x^{(0)})` of each trajectory that moved at
/// least once (`T_m ≥ 1`); `M` below counts those trajectories. Predicts
/// `(i, j)` iff `S†_{i→j} = Σ_m x_{m,i}^{(1)} x_{m,j}^{(0)} > ½ √(C M ln n)`.
pub fn threshold_recover_t1(ensemble: &Ensemble, c_thr: f64) -> Result<DirectedGraph> {
    if c_thr.is_nan() || c_thr < 0.0 {
        return Err(Error::arg(format!("threshold constant {c_thr} must be non-negative")));
    }
    let n = ensemble.n();
    let epochs = ensemble
        .trajectories()
        .iter()
        .enumerate()
        .filter(|(_, tr)| tr.effective_horizon() >= 1)
        .map(|(m, _)| (m, 0u64));
    let (scores, m_eff) = classifier::accumulate(ensemble, epochs);
    let threshold = 0.5 * (c_thr * m_eff as f64 * (n as f64).ln()).sqrt();
    let adj = (0..n)
        .map(|i| {
            (0..n)
                .filter(|&j| j != i && scores[i * n + j] as f64 > threshold)
                .collect()
        })
        .collect();
    Ok(DirectedGraph::from_sorted_unchecked(n, adj))
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;
    use crate::dynamics::{simulate_ensemble, Trajectory};
    use crate::graph::gen_fixed_outdegree;

    #[test]
    fn picks_the_high_scores() {
        // row 0 off-diagonal: {5, 5, 0, 0, 0}
        let n = 6;
        let mut s = vec![0i64; n * n];
        s[2] = 5;
        s[4] = 5;
        s[0] = 99;
        let c = ClassifierMatrix::from_scores(n, s).unwrap();
        let r = recover_graph(&c).unwrap();
        assert_eq!(r.predicted.out_neighbors(0), &[2, 4]);
        assert_eq!(r.per_row_margin[0], 5.0);
        assert_eq!(r.degenerate_rows, (1..6).collect::<Vec<_>>());
    }

    #[test]
    fn all_zero_matrix_is_degenerate() {
        let c = ClassifierMatrix::from_scores(4, vec![0; 16]).unwrap();
        let r = recover_graph(&c).unwrap();
        assert_eq!(r.predicted.edge_count(), 0);
        assert_eq!(r.degenerate_rows, vec![0, 1, 2, 3]);
        assert!(recover_graph(&ClassifierMatrix::from_scores(2, vec![0; 4]).unwrap()).is_err());
    }

    #[test]
    fn consensus_at_zero_predicts_nothing() {
        let tr = Trajectory::from_opinions(&[vec![-1; 8]]).unwrap();
        let e = Ensemble::new(vec![tr; 3], None).unwrap();
        let r = recover_graph(&classifier_matrix(&e, 1).unwrap()).unwrap();
        assert_eq!(r.predicted.edge_count(), 0);
        assert_eq!(r.degenerate_rows.len(), 8);
        assert_eq!(threshold_recover_t1(&e, 16.0).unwrap().edge_count(), 0);
    }

    #[test]
    fn recovers_small_graph_from_long_runs() {
        let g = gen_fixed_outdegree(30, &[2, 3], 4).unwrap();
        let e = simulate_ensemble(&g, 400, 30, 8, true).unwrap();
        let r = recover_graph(&classifier_matrix(&e, 1).unwrap()).unwrap();
        assert_eq!(r.predicted, g);
    }

    #[test]
    fn threshold_baseline_recovers_with_many_samples() {
        let g = gen_fixed_outdegree(40, &[3], 6).unwrap();
        let e = simulate_ensemble(&g, 8000, 1, 2, true).unwrap();
        assert_eq!(threshold_recover_t1(&e, 16.0).unwrap(), g);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn row_shift_invariance(
            scores in prop::collection::vec(-50i64..50, 36),
            row in 0usize..6,
            shift in -1000i64..1000,
        ) {
            let base = recover_graph(&ClassifierMatrix::from_scores(6, scores.clone()).unwrap()).unwrap();
            let mut shifted = scores;
            shifted[row * 6..(row + 1) * 6].iter_mut().for_each(|s| *s += shift);
            let moved = recover_graph(&ClassifierMatrix::from_scores(6, shifted).unwrap()).unwrap();
            prop_assert_eq!(base.predicted.out_neighbors(row), moved.predicted.out_neighbors(row));
        }
    }
}
