//! Directed graphs on the vertex set `0..n`.
//!
//! A [`DirectedGraph`] is stored in compressed sparse row form: the
//! out-neighborhood `N_i` of each vertex is a sorted, duplicate-free slice
//! that never contains `i` itself. Graphs are immutable once built.

mod admissibility;
mod generate;
mod io;
mod stationary;

use std::collections::VecDeque;

pub use admissibility::{
    check_admissibility, AdmissibilityOptions, AdmissibilityReport, BoundCheck, ConsensusEstimate,
    ExpansionSample, MixingReport,
};
pub use generate::{gen_directed_gnp, gen_fixed_outdegree};
pub use io::{load_edge_list, read_edge_list, save_edge_list, write_edge_list, EdgeListWarnings};
pub use stationary::{stationary_distribution, stationary_residual};

use crate::bits;
use crate::error::{Error, Result};

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct DirectedGraph {
    n: usize,
    offsets: Vec<usize>,
    targets: Vec<u32>,
    in_degrees: Vec<usize>,
}

impl std::fmt::Debug for DirectedGraph {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DirectedGraph")
            .field("n", &self.n)
            .field("edges", &self.edge_count())
            .finish()
    }
}

impl DirectedGraph {
    /// Builds a graph from per-vertex out-neighbor lists. Lists are sorted;
    /// self-loops, duplicates and out-of-range ids are rejected.
    pub fn new(n: usize, mut out_adj: Vec<Vec<usize>>) -> Result<Self> {
        if out_adj.len() != n {
            return Err(Error::arg(format!(
                "adjacency has {} rows for {n} vertices",
                out_adj.len()
            )));
        }
        if n > u32::MAX as usize {
            return Err(Error::arg("vertex count exceeds u32 range"));
        }
        for (i, list) in out_adj.iter_mut().enumerate() {
            list.sort_unstable();
            for w in list.windows(2) {
                if w[0] == w[1] {
                    return Err(Error::data(format!("duplicate edge {i} -> {}", w[0])));
                }
            }
            if let Some(&last) = list.last() {
                if last >= n {
                    return Err(Error::data(format!("edge {i} -> {last} out of range (n = {n})")));
                }
            }
            if list.binary_search(&i).is_ok() {
                return Err(Error::data(format!("self-loop at vertex {i}")));
            }
        }
        Ok(Self::from_sorted_unchecked(n, out_adj))
    }

    /// Builds a graph from an edge list; see [`DirectedGraph::new`].
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut adj = vec![Vec::new(); n];
        for &(u, v) in edges {
            if u >= n {
                return Err(Error::data(format!("edge {u} -> {v} out of range (n = {n})")));
            }
            adj[u].push(v);
        }
        Self::new(n, adj)
    }

    pub(crate) fn from_sorted_unchecked(n: usize, out_adj: Vec<Vec<usize>>) -> Self {
        let mut offsets = Vec::with_capacity(n + 1);
        let mut targets = Vec::with_capacity(out_adj.iter().map(Vec::len).sum());
        let mut in_degrees = vec![0usize; n];
        offsets.push(0);
        for list in &out_adj {
            for &j in list {
                targets.push(j as u32);
                in_degrees[j] += 1;
            }
            offsets.push(targets.len());
        }
        DirectedGraph {
            n,
            offsets,
            targets,
            in_degrees,
        }
    }

    pub fn empty(n: usize) -> Self {
        Self::from_sorted_unchecked(n, vec![Vec::new(); n])
    }

    /// Complete directed graph: every ordered pair `i != j` is an edge.
    pub fn complete(n: usize) -> Self {
        let adj = (0..n)
            .map(|i| (0..n).filter(|&j| j != i).collect())
            .collect();
        Self::from_sorted_unchecked(n, adj)
    }

    /// Directed cycle `0 -> 1 -> ... -> n-1 -> 0`. For `n = 2` this is the
    /// 2-cycle `0 <-> 1`.
    pub fn cycle(n: usize) -> Self {
        let adj = (0..n).map(|i| vec![(i + 1) % n]).collect();
        Self::from_sorted_unchecked(n, adj)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn edge_count(&self) -> usize {
        self.targets.len()
    }

    /// `N_i` as a sorted slice.
    #[inline]
    pub fn out_neighbors(&self, i: usize) -> &[u32] {
        &self.targets[self.offsets[i]..self.offsets[i + 1]]
    }

    #[inline]
    pub fn out_degree(&self, i: usize) -> usize {
        self.offsets[i + 1] - self.offsets[i]
    }

    #[inline]
    pub fn in_degree(&self, i: usize) -> usize {
        self.in_degrees[i]
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        i < self.n && j < self.n && self.out_neighbors(i).binary_search(&(j as u32)).is_ok()
    }

    /// All edges in row-major order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n).flat_map(move |i| self.out_neighbors(i).iter().map(move |&j| (i, j as usize)))
    }

    pub fn out_adjacency(&self) -> Vec<Vec<usize>> {
        (0..self.n)
            .map(|i| self.out_neighbors(i).iter().map(|&j| j as usize).collect())
            .collect()
    }

    pub fn min_out_degree(&self) -> usize {
        (0..self.n).map(|i| self.out_degree(i)).min().unwrap_or(0)
    }

    /// Errors with [`Error::InvalidGraph`] if some vertex has no out-neighbor;
    /// the voter update is undefined there.
    pub fn require_out_neighbors(&self) -> Result<()> {
        match (0..self.n).find(|&i| self.out_degree(i) == 0) {
            Some(i) => Err(Error::graph(format!("vertex {i} has out-degree 0"))),
            None => Ok(()),
        }
    }

    /// Out-neighborhoods as bit masks of `ceil(n / 64)` words each.
    pub fn neighbor_masks(&self) -> Vec<Vec<u64>> {
        let words = bits::words_for(self.n);
        (0..self.n)
            .map(|i| {
                let mut mask = vec![0u64; words];
                for &j in self.out_neighbors(i) {
                    bits::set(&mut mask, j as usize);
                }
                mask
            })
            .collect()
    }

    pub fn reversed(&self) -> DirectedGraph {
        let mut adj = vec![Vec::new(); self.n];
        for (i, j) in self.edges() {
            adj[j].push(i);
        }
        // rows are produced in increasing source order, hence already sorted
        Self::from_sorted_unchecked(self.n, adj)
    }

    pub fn is_strongly_connected(&self) -> bool {
        if self.n == 0 {
            return false;
        }
        reaches_all(self) && reaches_all(&self.reversed())
    }
}

fn reaches_all(g: &DirectedGraph) -> bool {
    let mut seen = vec![false; g.n];
    let mut queue = VecDeque::from([0usize]);
    seen[0] = true;
    let mut count = 1;
    while let Some(u) = queue.pop_front() {
        for &v in g.out_neighbors(u) {
            let v = v as usize;
            if !seen[v] {
                seen[v] = true;
                count += 1;
                queue.push_back(v);
            }
        }
    }
    count == g.n
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn construction_sorts_and_counts() {
        let g = DirectedGraph::new(3, vec![vec![2, 1], vec![2], vec![0]]).unwrap();
        assert_eq!(g.out_neighbors(0), &[1, 2]);
        assert_eq!(g.edge_count(), 4);
        assert_eq!(g.in_degree(2), 2);
        assert_eq!(
            g.edge_count(),
            (0..3).map(|i| g.out_degree(i)).sum::<usize>()
        );
        assert!(g.has_edge(0, 2) && !g.has_edge(2, 1));
    }

    #[test]
    fn rejects_self_loops_and_duplicates() {
        assert!(matches!(
            DirectedGraph::new(2, vec![vec![0], vec![]]),
            Err(Error::InvalidData(_))
        ));
        assert!(matches!(
            DirectedGraph::new(2, vec![vec![1, 1], vec![]]),
            Err(Error::InvalidData(_))
        ));
        assert!(DirectedGraph::from_edges(2, &[(0, 5)]).is_err());
    }

    #[test]
    fn connectivity_and_out_degree_checks() {
        assert!(DirectedGraph::cycle(5).is_strongly_connected());
        let path = DirectedGraph::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        assert!(!path.is_strongly_connected());
        assert!(matches!(
            path.require_out_neighbors(),
            Err(Error::InvalidGraph(_))
        ));
        assert_eq!(DirectedGraph::complete(4).edge_count(), 12);
    }
}
