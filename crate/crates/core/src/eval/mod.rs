//! Scoring of recovered graphs, the sample-size threshold, and the
//! experiment runner.

mod experiment;

use serde::Serialize;

pub use experiment::{
    run_experiment, run_experiment_with, ExperimentConfig, GeneratorSpec, GridPoint, Horizon, PointStatus,
    ResultRow, ResultsTable, RunOptions, RESULTS_CSV_HEADER, RESULTS_CSV_VERSION,
};

use crate::error::{Error, Result};
use crate::graph::DirectedGraph;

/// Confusion counts over ordered pairs `i != j`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Metrics {
    pub true_positives: u64,
    pub false_positives: u64,
    pub false_negatives: u64,
    pub true_negatives: u64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub exact: bool,
}

/// Compares `predicted` against `truth` edge by edge.
///
/// Precision is 0 without predictions, recall is 0 for an empty truth, and
/// F1 is 0 when both are 0.
pub fn score(predicted: &DirectedGraph, truth: &DirectedGraph) -> Result<Metrics> {
    let n = truth.n();
    if predicted.n() != n {
        return Err(Error::arg(format!(
            "predicted graph has n = {}, truth has n = {n}",
            predicted.n()
        )));
    }
    let tp: u64 = (0..n)
        .map(|i| {
            let (a, b) = (predicted.out_neighbors(i), truth.out_neighbors(i));
            a.iter().filter(|&&j| b.binary_search(&j).is_ok()).count() as u64
        })
        .sum();
    let fp = predicted.edge_count() as u64 - tp;
    let fn_ = truth.edge_count() as u64 - tp;
    let pairs = (n as u64) * (n as u64).saturating_sub(1);
    let tn = pairs - tp - fp - fn_;
    let ratio = |num: u64, den: u64| if den == 0 { 0.0 } else { num as f64 / den as f64 };
    let precision = ratio(tp, tp + fp);
    let recall = ratio(tp, tp + fn_);
    let f1 = if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    };
    Ok(Metrics {
        true_positives: tp,
        false_positives: fp,
        false_negatives: fn_,
        true_negatives: tn,
        precision,
        recall,
        f1,
        exact: fp == 0 && fn_ == 0,
    })
}

/// `2r / (r + 1)` with `r = |E| / n²`: the F1 of predicting every one of
/// the `n²` ordered pairs, diagonal included.
pub fn baseline_f1(truth: &DirectedGraph) -> f64 {
    let n = truth.n() as f64;
    let r = truth.edge_count() as f64 / (n * n);
    2.0 * r / (r + 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThresholdCheck {
    pub satisfied: bool,
    /// `M min{T, n} / (n² p² ln n)`.
    pub ratio: f64,
}

/// Compares the sample size `M min{T, n}` with `C n² p² ln n`.
pub fn threshold_check(n: f64, p: f64, m: f64, t: f64, c: f64) -> ThresholdCheck {
    let ratio = m * t.min(n) / (n * n * p * p * n.ln());
    ThresholdCheck {
        satisfied: ratio >= c,
        ratio,
    }
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;
    use crate::graph::gen_directed_gnp;

    fn graph(n: usize, edges: &[(usize, usize)]) -> DirectedGraph {
        DirectedGraph::from_edges(n, edges).unwrap()
    }

    #[test]
    fn hand_counts() {
        let truth = graph(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]);
        let m = score(&truth, &truth).unwrap();
        assert_eq!((m.precision, m.recall, m.f1, m.exact), (1.0, 1.0, 1.0, true));

        let m = score(&DirectedGraph::empty(4), &truth).unwrap();
        assert_eq!((m.precision, m.f1, m.exact), (0.0, 0.0, false));

        let pred = graph(4, &[(0, 1), (1, 2), (0, 2), (2, 0)]);
        let m = score(&pred, &truth).unwrap();
        assert_eq!((m.true_positives, m.false_positives, m.false_negatives), (2, 2, 2));
        assert_eq!((m.precision, m.recall, m.f1), (0.5, 0.5, 0.5));
        assert_eq!(m.true_negatives, 12 - 6);
        assert!(score(&pred, &DirectedGraph::empty(5)).is_err());
    }

    #[test]
    fn baseline_values() {
        let round4 = |x: f64| (x * 1e4).round() / 1e4;
        for (n, e, want) in [(50usize, 194usize, 0.1440), (100, 392, 0.0754), (475, 25_571, 0.2036)] {
            let r = e as f64 / (n * n) as f64;
            assert_eq!(round4(2.0 * r / (r + 1.0)), want);
        }
        let g = gen_directed_gnp(50, 0.08, 1).unwrap();
        let r = g.edge_count() as f64 / 2500.0;
        assert_eq!(baseline_f1(&g), 2.0 * r / (r + 1.0));
    }

    #[test]
    fn baseline_is_f1_of_predicting_all_pairs_with_diagonal() {
        // predicting all n^2 pairs: precision |E| / n^2, recall 1
        let g = gen_directed_gnp(30, 0.2, 2).unwrap();
        let precision = g.edge_count() as f64 / 900.0;
        assert!((baseline_f1(&g) - 2.0 * precision / (precision + 1.0)).abs() < 1e-15);
        // without the diagonal the complete prediction scores slightly higher
        let complete = score(&DirectedGraph::complete(30), &g).unwrap();
        assert!(complete.f1 > baseline_f1(&g));
    }

    #[test]
    fn threshold_examples() {
        let e = std::f64::consts::E;
        let t = threshold_check(e, 1.0, 1.0, 1.0, 0.1);
        assert!((t.ratio - 1.0 / (e * e)).abs() < 1e-15);
        assert!(t.satisfied);
        let a = threshold_check(3000.0, 12_005.0 / 9e6, 1.0, 3000.0, 1.0);
        let b = threshold_check(3000.0, 12_005.0 / 9e6, 2.0, 3000.0, 1.0);
        assert!((b.ratio - 2.0 * a.ratio).abs() < 1e-12);
        assert!(a.ratio > 20.0 && a.ratio < 27.0);
        // T beyond n does not count
        assert_eq!(threshold_check(100.0, 0.1, 1.0, 500.0, 1.0), threshold_check(100.0, 0.1, 1.0, 100.0, 1.0));
    }

    proptest! {
        #[test]
        fn swapping_roles_swaps_precision_and_recall(n in 3usize..25, p in 0.0f64..0.5, s1: u64, s2: u64) {
            let a = gen_directed_gnp(n, p, s1).unwrap();
            let b = gen_directed_gnp(n, p, s2).unwrap();
            let ab = score(&a, &b).unwrap();
            let ba = score(&b, &a).unwrap();
            prop_assert_eq!(ab.precision, ba.recall);
            prop_assert_eq!(ab.recall, ba.precision);
            prop_assert!((ab.f1 - ba.f1).abs() < 1e-15);
            prop_assert_eq!(
                ab.true_positives + ab.false_positives + ab.false_negatives + ab.true_negatives,
                (n * (n - 1)) as u64
            );
        }
    }
}
