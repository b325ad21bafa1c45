//! Literal checks of the trajectory events used in the likelihood analysis.
//!
//! With `S^{(t)} = Σ_i x_i^{(t)}`, `S_i^{(t)} = Σ_{j ∈ N_i} x_j^{(t)}` and
//! `L = ln n`:
//!
//! - moderate increment: `|S^{(0)}| ≤ n / L` for every trajectory, and
//!   `|S^{(t+1)} − S^{(t)}| ≤ 2 L² (n − |S^{(t)}|)^{1/2}` for `t < T_m`;
//! - from global to local: for every `t`, with `g = n − |S^{(t)}|`,
//!   `(p/10) g 1{g ≥ L²/p} ≤ min_i (d_i − |S_i^{(t)}|)` and
//!   `max_i (d_i − |S_i^{(t)}|) ≤ max{10 L², 10 p g}`;
//! - random-walk behavior: (i) `|S^{(t)}| ≤ n/2` for `t ≤ min{T, n / L^10}`;
//!   (ii) for `1 ≤ Δ ≤ n / L^10` the number of pairs `(m, t)`, `t ≤ T`,
//!   with `n − Δ ≤ |S^{(t)}| < n` is at most `M max{Δ L^5, L^10}`.
//!
//! Each sub-check keeps the `(m, t)` pair with the largest excess
//! (left side minus bound), so a passing check still reports its margin.

use rayon::prelude::*;
use serde::Serialize;

use super::Ensemble;
use crate::bits;
use crate::error::{Error, Result};
use crate::graph::DirectedGraph;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Witness {
    pub m: usize,
    pub t: u64,
    /// Left-hand side minus bound; positive means violated.
    pub excess: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EventCheck {
    pub ok: bool,
    /// `None` when no `(m, t)` pair is constrained.
    pub worst: Option<Witness>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OccupationWitness {
    pub delta: u64,
    pub count: u64,
    pub bound: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OccupationCheck {
    pub ok: bool,
    /// Largest `count - bound` over `Δ`; `None` when the `Δ` range is empty.
    pub worst: Option<OccupationWitness>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EventReport {
    pub mi_ok: bool,
    pub fgtl_ok: bool,
    pub rw_ok: bool,
    pub mi_initial: EventCheck,
    pub mi_increment: EventCheck,
    pub fgtl_lower: EventCheck,
    pub fgtl_upper: EventCheck,
    pub rw_spread: EventCheck,
    pub rw_occupation: OccupationCheck,
}

#[derive(Default, Clone, Copy)]
struct Worst(Option<Witness>);

impl Worst {
    fn offer(&mut self, m: usize, t: u64, excess: f64) {
        if self.0.is_none_or(|w| excess > w.excess) {
            self.0 = Some(Witness { m, t, excess });
        }
    }

    fn merge(&mut self, other: Worst) {
        if let Some(w) = other.0 {
            self.offer(w.m, w.t, w.excess);
        }
    }

    fn check(self) -> EventCheck {
        EventCheck {
            ok: self.0.is_none_or(|w| w.excess <= 0.0),
            worst: self.0,
        }
    }
}

#[derive(Default)]
struct PerTrajectory {
    mi_initial: Worst,
    mi_increment: Worst,
    fgtl_lower: Worst,
    fgtl_upper: Worst,
    rw_spread: Worst,
    /// `gap_counts[g]` = number of `t` with `n − |S^{(t)}| = g`, for small `g`.
    gap_counts: Vec<u64>,
}

/// Evaluates the three events on every trajectory of `ensemble`, which must
/// have been simulated on `graph`; `p` is the edge density used in the
/// local bounds.
pub fn check_trajectory_events(graph: &DirectedGraph, ensemble: &Ensemble, p: f64) -> Result<EventReport> {
    let n = graph.n();
    if ensemble.n() != n {
        return Err(Error::arg(format!(
            "ensemble has n = {}, graph has n = {n}",
            ensemble.n()
        )));
    }
    if n < 2 {
        return Err(Error::arg("events need n >= 2"));
    }
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::arg(format!("density {p} outside (0, 1]")));
    }
    let nf = n as f64;
    let ln = nf.ln();
    let l2 = ln * ln;
    let l10 = l2.powi(5);
    let spread_horizon = ensemble.horizon().min((nf / l10).floor() as u64);
    let max_delta = (nf / l10).floor() as u64;
    let masks = graph.neighbor_masks();
    let degrees: Vec<i64> = (0..n).map(|i| graph.out_degree(i) as i64).collect();

    let per_m: Vec<PerTrajectory> = ensemble
        .trajectories()
        .par_iter()
        .enumerate()
        .map(|(m, tr)| {
            let mut out = PerTrajectory {
                gap_counts: vec![0; max_delta as usize + 1],
                ..Default::default()
            };
            let t_m = tr.effective_horizon();
            let totals: Vec<i64> = (0..=t_m).map(|t| tr.total(t)).collect();
            out.mi_initial.offer(m, 0, totals[0].abs() as f64 - nf / ln);
            for t in 0..t_m {
                let (s, s_next) = (totals[t as usize], totals[t as usize + 1]);
                let gap = (n as i64 - s.abs()) as f64;
                out.mi_increment.offer(m, t, (s_next - s).abs() as f64 - 2.0 * l2 * gap.sqrt());
            }
            for t in 0..=t_m {
                let g = (n as i64 - totals[t as usize].abs()) as f64;
                let state = tr.state(t);
                let (mut lo, mut hi) = (i64::MAX, i64::MIN);
                for (mask, &d) in masks.iter().zip(&degrees) {
                    let local = 2 * bits::count_and(mask, state) as i64 - d;
                    let slack = d - local.abs();
                    lo = lo.min(slack);
                    hi = hi.max(slack);
                }
                let lower = if g >= l2 / p { p / 10.0 * g } else { 0.0 };
                let upper = (10.0 * l2).max(10.0 * p * g);
                out.fgtl_lower.offer(m, t, lower - lo as f64);
                out.fgtl_upper.offer(m, t, hi as f64 - upper);
            }
            for t in 0..=spread_horizon {
                let s = totals[t.min(t_m) as usize];
                out.rw_spread.offer(m, t, s.abs() as f64 - nf / 2.0);
            }
            for &s in &totals {
                let g = (n as i64 - s.abs()) as u64;
                if g >= 1 && g <= max_delta {
                    out.gap_counts[g as usize] += 1;
                }
            }
            out
        })
        .collect();

    let mut total = PerTrajectory {
        gap_counts: vec![0; max_delta as usize + 1],
        ..Default::default()
    };
    for part in per_m {
        total.mi_initial.merge(part.mi_initial);
        total.mi_increment.merge(part.mi_increment);
        total.fgtl_lower.merge(part.fgtl_lower);
        total.fgtl_upper.merge(part.fgtl_upper);
        total.rw_spread.merge(part.rw_spread);
        for (acc, c) in total.gap_counts.iter_mut().zip(part.gap_counts) {
            *acc += c;
        }
    }

    let big_m = ensemble.len() as f64;
    let mut occupation: Option<OccupationWitness> = None;
    let mut cumulative = 0u64;
    for delta in 1..=max_delta {
        cumulative += total.gap_counts[delta as usize];
        let bound = big_m * (delta as f64 * ln.powi(5)).max(l10);
        if occupation.is_none_or(|w| cumulative as f64 - bound > w.count as f64 - w.bound) {
            occupation = Some(OccupationWitness {
                delta,
                count: cumulative,
                bound,
            });
        }
    }
    let rw_occupation = OccupationCheck {
        ok: occupation.is_none_or(|w| w.count as f64 <= w.bound),
        worst: occupation,
    };

    let mi_initial = total.mi_initial.check();
    let mi_increment = total.mi_increment.check();
    let fgtl_lower = total.fgtl_lower.check();
    let fgtl_upper = total.fgtl_upper.check();
    let rw_spread = total.rw_spread.check();
    Ok(EventReport {
        mi_ok: mi_initial.ok && mi_increment.ok,
        fgtl_ok: fgtl_lower.ok && fgtl_upper.ok,
        rw_ok: rw_spread.ok && rw_occupation.ok,
        mi_initial,
        mi_increment,
        fgtl_lower,
        fgtl_upper,
        rw_spread,
        rw_occupation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{simulate_ensemble, simulate_from, Trajectory};
    use crate::graph::{gen_directed_gnp, gen_fixed_outdegree};

    #[test]
    fn two_cycle_evaluated_literally() {
        let g = DirectedGraph::cycle(2);
        let tr = simulate_from(&g, &[1, -1], 6, 1, true).unwrap();
        let e = Ensemble::new(vec![tr], None).unwrap();
        let r = check_trajectory_events(&g, &e, 0.5).unwrap();
        // S = 0 throughout: increments 0, bound 2 ln(2)^2 sqrt(2)
        let inc = r.mi_increment.worst.unwrap();
        assert!((inc.excess + 2.0 * 2f64.ln().powi(2) * 2f64.sqrt()).abs() < 1e-12);
        // |S^{(0)}| = 0 <= 2 / ln 2
        assert!(r.mi_ok);
        // every neighborhood is a single vertex, so the slack d_i - |S_i| is 0,
        // below the lower bound (p/10) * 2 since 2 >= ln(2)^2 / p
        assert!(!r.fgtl_ok);
        assert!((r.fgtl_lower.worst.unwrap().excess - 0.1).abs() < 1e-12);
        assert!(r.fgtl_upper.ok);
        // n / ln(2)^10 ≈ 80, so all 7 states count towards every Δ >= 2,
        // against a bound of M Δ ln(2)^5 ≈ 0.16 Δ
        assert!(r.rw_spread.ok);
        assert!(!r.rw_occupation.ok);
        assert_eq!(r.rw_occupation.worst.unwrap().count, 7);
    }

    #[test]
    fn consensus_at_zero() {
        let g = gen_fixed_outdegree(50, &[10], 1).unwrap();
        let tr = simulate_from(&g, &[1; 50], 20, 1, true).unwrap();
        let e = Ensemble::new(vec![tr.clone(), tr], None).unwrap();
        let r = check_trajectory_events(&g, &e, 0.2).unwrap();
        // no step before T_m = 0
        assert_eq!(r.mi_increment.worst, None);
        assert!(r.mi_increment.ok);
        assert!(r.fgtl_ok);
        // the time-zero clauses bound |S^{(0)}| and fail at consensus
        assert!(!r.mi_initial.ok);
        assert!(!r.rw_spread.ok);
        assert!(!r.mi_ok && !r.rw_ok);
    }

    #[test]
    fn witness_points_at_violation() {
        let g = DirectedGraph::complete(4);
        let states = vec![vec![1, -1, 1, -1], vec![1, 1, 1, -1], vec![1, 1, 1, 1]];
        let tr = Trajectory::from_opinions(&states).unwrap();
        let e = Ensemble::new(vec![tr], None).unwrap();
        let r = check_trajectory_events(&g, &e, 1.0).unwrap();
        let w = r.rw_spread.worst.unwrap();
        assert_eq!((w.m, w.t), (0, 0));
        let w = r.mi_increment.worst.unwrap();
        assert!(w.t < 2);
    }

    #[test]
    fn typical_gnp_ensemble_passes_mi_and_fgtl() {
        let g = gen_directed_gnp(300, 0.15, 2).unwrap();
        let e = simulate_ensemble(&g, 4, 300, 3, true).unwrap();
        let r = check_trajectory_events(&g, &e, 0.15).unwrap();
        assert!(r.mi_increment.ok && r.fgtl_ok, "{r:?}");
    }

    #[test]
    fn rejects_mismatch() {
        let g = DirectedGraph::complete(4);
        let e = simulate_ensemble(&DirectedGraph::complete(5), 1, 3, 1, true).unwrap();
        assert!(check_trajectory_events(&g, &e, 0.5).is_err());
        let e = simulate_ensemble(&g, 1, 3, 1, true).unwrap();
        assert!(check_trajectory_events(&g, &e, 0.0).is_err());
    }
}
