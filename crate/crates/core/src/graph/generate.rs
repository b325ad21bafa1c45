use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::DirectedGraph;
use crate::error::{Error, Result};

/// Directed Erdős–Rényi graph: every ordered pair `(i, j)`, `i != j`, is an
/// edge independently with probability `p`.
///
/// Pairs are visited in row-major order from a ChaCha8 stream seeded with
/// `seed`, so the output is identical on every platform.
pub fn gen_directed_gnp(n: usize, p: f64, seed: u64) -> Result<DirectedGraph> {
    if n < 2 {
        return Err(Error::arg(format!("gnp needs n >= 2, got {n}")));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::arg(format!("edge probability {p} outside [0, 1]")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let adj = (0..n)
        .map(|i| {
            (0..n)
                .filter(|&j| j != i && rng.random_bool(p))
                .collect::<Vec<_>>()
        })
        .collect();
    Ok(DirectedGraph::from_sorted_unchecked(n, adj))
}

/// Random graph where vertex `i` first draws its out-degree uniformly from
/// `degree_choices`, then that many distinct out-neighbors uniformly from
/// `[n] \ {i}`.
pub fn gen_fixed_outdegree(n: usize, degree_choices: &[usize], seed: u64) -> Result<DirectedGraph> {
    if n < 2 {
        return Err(Error::arg(format!("graph needs n >= 2, got {n}")));
    }
    if degree_choices.is_empty() {
        return Err(Error::arg("empty degree set"));
    }
    if let Some(&d) = degree_choices.iter().find(|&&d| d == 0 || d > n - 1) {
        return Err(Error::arg(format!(
            "out-degree {d} not in 1..={} for n = {n}",
            n - 1
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let adj = (0..n)
        .map(|i| {
            let d = degree_choices[rng.random_range(0..degree_choices.len())];
            let mut list: Vec<usize> = index::sample(&mut rng, n - 1, d)
                .into_iter()
                .map(|k| if k >= i { k + 1 } else { k })
                .collect();
            list.sort_unstable();
            list
        })
        .collect();
    Ok(DirectedGraph::from_sorted_unchecked(n, adj))
}
