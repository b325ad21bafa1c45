use super::DirectedGraph;
use crate::error::{Error, Result};

/// One step of the walk operator: `(πP)(j) = Σ_{i : j ∈ N_i} π(i) / d_i`.
pub(crate) fn walk_step(graph: &DirectedGraph, pi: &[f64], out: &mut [f64]) {
    out.iter_mut().for_each(|x| *x = 0.0);
    for (i, &mass) in pi.iter().enumerate() {
        let nbrs = graph.out_neighbors(i);
        if nbrs.is_empty() || mass == 0.0 {
            continue;
        }
        let share = mass / nbrs.len() as f64;
        for &j in nbrs {
            out[j as usize] += share;
        }
    }
}

/// `‖πP − π‖₁` for the uniform-out-neighbor walk.
pub fn stationary_residual(graph: &DirectedGraph, pi: &[f64]) -> f64 {
    let mut next = vec![0.0; pi.len()];
    walk_step(graph, pi, &mut next);
    next.iter().zip(pi).map(|(a, b)| (a - b).abs()).sum()
}

/// Stationary distribution of the random walk that steps from `i` to a
/// uniform element of `N_i`.
///
/// Iterates the lazy operator `π ← (π + πP) / 2` from the uniform vector.
/// It has the same fixed points as `P` but also converges on periodic
/// chains. Stops once `‖πP − π‖₁ ≤ tol`.
pub fn stationary_distribution(graph: &DirectedGraph, tol: f64, max_iter: usize) -> Result<Vec<f64>> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::arg(format!("tolerance must be positive, got {tol}")));
    }
    graph.require_out_neighbors()?;
    if !graph.is_strongly_connected() {
        return Err(Error::graph("graph is not strongly connected"));
    }
    let n = graph.n();
    let mut pi = vec![1.0 / n as f64; n];
    let mut next = vec![0.0; n];
    let mut residual = f64::INFINITY;
    for _ in 0..max_iter {
        walk_step(graph, &pi, &mut next);
        residual = next.iter().zip(&pi).map(|(a, b)| (a - b).abs()).sum();
        if residual <= tol {
            normalize(&mut pi);
            return Ok(pi);
        }
        for (p, q) in pi.iter_mut().zip(&next) {
            *p = 0.5 * (*p + q);
        }
        normalize(&mut pi);
    }
    Err(Error::NoConvergence {
        iterations: max_iter,
        residual,
        last: pi,
    })
}

fn normalize(pi: &mut [f64]) {
    let total: f64 = pi.iter().sum();
    pi.iter_mut().for_each(|x| *x /= total);
}
