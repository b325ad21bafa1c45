//! Discrete-time voter model.
//!
//! At time 0 every vertex holds an independent uniform opinion in `{-1, +1}`.
//! At each step every vertex `i`, simultaneously, picks a uniform
//! out-neighbor `j ∈ N_i` and copies `j`'s opinion from the previous step.
//!
//! Opinions are stored one bit per vertex (`1` ↔ `+1`). A trajectory is kept
//! only up to its effective horizon `T_m = min(T, T_cons)`; consensus is
//! absorbing, so any later state equals the state at `T_m` and is
//! regenerated on demand by [`Trajectory::state_at`].
//!
//! Randomness: trajectory `m` of an ensemble uses the seed
//! `mix(master_seed, m)`. Within a trajectory the initial opinion of `i` is
//! the top bit of `mix3(seed, INIT, i)` and the neighbor copied by `i` at
//! step `t` is `below(mix(mix3(seed, STEP, t), i), d_i)` (see [`crate::seed`]).

mod duality;
mod events;
mod format;
mod observables;

use rayon::prelude::*;

pub use duality::{meeting_probability, opinion_correlation, Estimate};
pub use events::{check_trajectory_events, EventReport, Witness};
pub use format::{
    read_votr, read_votr_file, write_ensemble_csv, write_trajectory_csv, write_votr, write_votr_file,
    VOTR_MAGIC, VOTR_VERSION,
};
pub use observables::{effective_time, weighted_mean_opinion};

use crate::bits;
use crate::error::{Error, Result};
use crate::graph::DirectedGraph;
use crate::seed::{self, stream};

/// Below this many vertices a step is computed on the calling thread.
const PARALLEL_STEP_MIN_VERTICES: usize = 1 << 14;

#[derive(Clone, PartialEq, Eq)]
pub struct Trajectory {
    n: usize,
    horizon: u64,
    words: usize,
    /// `T_m + 1` slices of `words` words each.
    slices: Vec<u64>,
    reached_consensus: bool,
}

impl std::fmt::Debug for Trajectory {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Trajectory")
            .field("n", &self.n)
            .field("horizon", &self.horizon)
            .field("effective_horizon", &self.effective_horizon())
            .field("reached_consensus", &self.reached_consensus)
            .finish()
    }
}

fn is_consensus(n: usize, slice: &[u64]) -> bool {
    let ones = bits::count_ones(slice);
    ones == 0 || ones == n
}

impl Trajectory {
    /// Builds a trajectory from explicit `±1` states, truncating at the first
    /// consensus state. Without consensus the horizon is `states.len() - 1`.
    pub fn from_opinions(states: &[Vec<i8>]) -> Result<Self> {
        let Some(first) = states.first() else {
            return Err(Error::arg("trajectory needs at least the initial state"));
        };
        let n = first.len();
        let words = bits::words_for(n);
        let horizon = states.len() as u64 - 1;
        let mut slices = Vec::new();
        let mut reached = false;
        for state in states {
            if state.len() != n {
                return Err(Error::arg("states have different lengths"));
            }
            let mut slice = vec![0u64; words];
            for (i, &x) in state.iter().enumerate() {
                match x {
                    1 => bits::set(&mut slice, i),
                    -1 => {}
                    other => return Err(Error::data(format!("opinion {other} is not ±1"))),
                }
            }
            reached = is_consensus(n, &slice);
            slices.extend_from_slice(&slice);
            if reached {
                break;
            }
        }
        Ok(Trajectory {
            n,
            horizon,
            words,
            slices,
            reached_consensus: reached,
        })
    }

    /// Reassembles a trajectory from raw slices, checking every invariant:
    /// padding bits clear, consensus only (and exactly) at the last slice
    /// when `reached_consensus`, and `T_m = T` otherwise.
    pub fn from_slices(n: usize, horizon: u64, slices: Vec<u64>, reached_consensus: bool) -> Result<Self> {
        let words = bits::words_for(n);
        if n == 0 || slices.is_empty() || !slices.len().is_multiple_of(words) {
            return Err(Error::data("slice buffer does not hold whole time slices"));
        }
        let count = slices.len() / words;
        let tail = bits::tail_mask(n);
        for slice in slices.chunks_exact(words) {
            if slice[words - 1] & !tail != 0 {
                return Err(Error::data("padding bits set beyond vertex count"));
            }
        }
        let t_m = count as u64 - 1;
        if t_m > horizon {
            return Err(Error::data(format!("{count} slices exceed horizon {horizon}")));
        }
        let first_consensus = slices.chunks_exact(words).position(|s| is_consensus(n, s));
        match (reached_consensus, first_consensus) {
            (true, Some(t)) if t == count - 1 => {}
            (false, None) if t_m == horizon => {}
            _ => {
                return Err(Error::data(
                    "consensus flag inconsistent with stored states or horizon",
                ))
            }
        }
        Ok(Trajectory {
            n,
            horizon,
            words,
            slices,
            reached_consensus,
        })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    /// Requested horizon `T`.
    #[inline]
    pub fn horizon(&self) -> u64 {
        self.horizon
    }

    /// `T_m`: the consensus time if consensus was reached, else `T`.
    #[inline]
    pub fn effective_horizon(&self) -> u64 {
        (self.slices.len() / self.words) as u64 - 1
    }

    #[inline]
    pub fn reached_consensus(&self) -> bool {
        self.reached_consensus
    }

    pub fn consensus_time(&self) -> Option<u64> {
        self.reached_consensus.then(|| self.effective_horizon())
    }

    #[inline]
    pub fn words_per_slice(&self) -> usize {
        self.words
    }

    /// Bit-packed state at `t ≤ T_m`.
    #[inline]
    pub fn state(&self, t: u64) -> &[u64] {
        let t = t as usize;
        &self.slices[t * self.words..(t + 1) * self.words]
    }

    /// State at any `t ≤ T`, regenerating post-consensus states.
    pub fn state_at(&self, t: u64) -> Option<&[u64]> {
        (t <= self.horizon).then(|| self.state(t.min(self.effective_horizon())))
    }

    /// `x_i^{(t)}` as `±1` for `t ≤ T_m`.
    #[inline]
    pub fn opinion(&self, t: u64, i: usize) -> i8 {
        if bits::get(self.state(t), i) {
            1
        } else {
            -1
        }
    }

    /// `S^{(t)} = Σ_i x_i^{(t)}` for `t ≤ T_m`.
    pub fn total(&self, t: u64) -> i64 {
        2 * bits::count_ones(self.state(t)) as i64 - self.n as i64
    }

    pub(crate) fn raw_slices(&self) -> &[u64] {
        &self.slices
    }
}

/// Step-by-step voter process; the building block for trajectory
/// simulation and for Monte-Carlo oracles that never store states.
pub struct VoterProcess<'g> {
    graph: &'g DirectedGraph,
    seed: u64,
    time: u64,
    state: Vec<u64>,
    next: Vec<u64>,
}

impl<'g> VoterProcess<'g> {
    /// Starts from the seed-derived uniform initial state.
    pub fn new(graph: &'g DirectedGraph, seed: u64) -> Result<Self> {
        let n = graph.n();
        let mut state = vec![0u64; bits::words_for(n)];
        let init = seed::mix(seed, stream::INITIAL);
        for i in 0..n {
            if seed::mix(init, i as u64) >> 63 == 1 {
                bits::set(&mut state, i);
            }
        }
        Self::with_state(graph, seed, state)
    }

    /// Starts from a given bit-packed state (`1` ↔ `+1`).
    pub fn with_state(graph: &'g DirectedGraph, seed: u64, state: Vec<u64>) -> Result<Self> {
        graph.require_out_neighbors()?;
        let words = bits::words_for(graph.n());
        if state.len() != words {
            return Err(Error::arg(format!(
                "initial state has {} words, expected {words}",
                state.len()
            )));
        }
        if words > 0 && state[words - 1] & !bits::tail_mask(graph.n()) != 0 {
            return Err(Error::arg("initial state has bits beyond the vertex count"));
        }
        Ok(VoterProcess {
            graph,
            seed,
            time: 0,
            next: vec![0u64; words],
            state,
        })
    }

    #[inline]
    pub fn time(&self) -> u64 {
        self.time
    }

    #[inline]
    pub fn state(&self) -> &[u64] {
        &self.state
    }

    pub fn opinion(&self, i: usize) -> i8 {
        if bits::get(&self.state, i) {
            1
        } else {
            -1
        }
    }

    pub fn plus_count(&self) -> usize {
        bits::count_ones(&self.state)
    }

    pub fn is_consensus(&self) -> bool {
        is_consensus(self.graph.n(), &self.state)
    }

    /// Advances one synchronous update.
    pub fn step(&mut self) {
        self.time += 1;
        let row = seed::mix3(self.seed, stream::STEP, self.time);
        let graph = self.graph;
        let prev = &self.state;
        let n = graph.n();
        let fill = |w: usize, word: &mut u64| {
            let mut out = 0u64;
            let lo = w * 64;
            for i in lo..(lo + 64).min(n) {
                let nbrs = graph.out_neighbors(i);
                let j = nbrs[seed::below(seed::mix(row, i as u64), nbrs.len())] as usize;
                out |= ((prev[j >> 6] >> (j & 63)) & 1) << (i - lo);
            }
            *word = out;
        };
        if n >= PARALLEL_STEP_MIN_VERTICES {
            self.next.par_iter_mut().enumerate().for_each(|(w, word)| fill(w, word));
        } else {
            self.next.iter_mut().enumerate().for_each(|(w, word)| fill(w, word));
        }
        std::mem::swap(&mut self.state, &mut self.next);
    }
}

/// Simulates one trajectory up to horizon `T`.
///
/// The stored trajectory always ends at `T_m = min(T, T_cons)`. With
/// `stop_at_consensus = false` the process keeps stepping to `T` after
/// consensus; since consensus is absorbing those states are not stored.
pub fn simulate_trajectory(graph: &DirectedGraph, horizon: u64, seed: u64, stop_at_consensus: bool) -> Result<Trajectory> {
    let process = VoterProcess::new(graph, seed)?;
    run(process, horizon, stop_at_consensus)
}

/// As [`simulate_trajectory`] but from a fixed initial state given as `±1`.
pub fn simulate_from(
    graph: &DirectedGraph,
    initial: &[i8],
    horizon: u64,
    seed: u64,
    stop_at_consensus: bool,
) -> Result<Trajectory> {
    if initial.len() != graph.n() {
        return Err(Error::arg("initial state length differs from vertex count"));
    }
    let mut state = vec![0u64; bits::words_for(graph.n())];
    for (i, &x) in initial.iter().enumerate() {
        match x {
            1 => bits::set(&mut state, i),
            -1 => {}
            other => return Err(Error::arg(format!("opinion {other} is not ±1"))),
        }
    }
    run(VoterProcess::with_state(graph, seed, state)?, horizon, stop_at_consensus)
}

fn run(mut process: VoterProcess<'_>, horizon: u64, stop_at_consensus: bool) -> Result<Trajectory> {
    let n = process.graph.n();
    let words = bits::words_for(n);
    let mut slices = process.state().to_vec();
    let mut reached = process.is_consensus();
    while !reached && process.time() < horizon {
        process.step();
        slices.extend_from_slice(process.state());
        reached = process.is_consensus();
    }
    if reached && !stop_at_consensus {
        while process.time() < horizon {
            process.step();
        }
        debug_assert!(process.is_consensus());
    }
    Ok(Trajectory {
        n,
        horizon,
        words,
        slices,
        reached_consensus: reached,
    })
}

/// `M` independent trajectories sharing `n` and the requested horizon.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ensemble {
    n: usize,
    horizon: u64,
    master_seed: Option<u64>,
    trajectories: Vec<Trajectory>,
}

impl Ensemble {
    pub fn new(trajectories: Vec<Trajectory>, master_seed: Option<u64>) -> Result<Self> {
        let Some(first) = trajectories.first() else {
            return Err(Error::arg("ensemble needs at least one trajectory"));
        };
        let (n, horizon) = (first.n(), first.horizon());
        if trajectories.iter().any(|t| t.n() != n || t.horizon() != horizon) {
            return Err(Error::data("trajectories disagree on n or horizon"));
        }
        Ok(Ensemble {
            n,
            horizon,
            master_seed,
            trajectories,
        })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn horizon(&self) -> u64 {
        self.horizon
    }

    pub fn master_seed(&self) -> Option<u64> {
        self.master_seed
    }

    /// Number of trajectories `M`.
    #[inline]
    pub fn len(&self) -> usize {
        self.trajectories.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trajectories.is_empty()
    }

    pub fn trajectories(&self) -> &[Trajectory] {
        &self.trajectories
    }

    pub fn into_trajectories(self) -> Vec<Trajectory> {
        self.trajectories
    }
}

/// Seed of trajectory `m` in an ensemble.
#[inline]
pub fn trajectory_seed(master_seed: u64, m: usize) -> u64 {
    seed::mix(master_seed, m as u64)
}

pub fn simulate_ensemble(
    graph: &DirectedGraph,
    trajectories: usize,
    horizon: u64,
    master_seed: u64,
    stop_at_consensus: bool,
) -> Result<Ensemble> {
    if trajectories == 0 {
        return Err(Error::arg("ensemble needs M >= 1"));
    }
    graph.require_out_neighbors()?;
    let list = (0..trajectories)
        .into_par_iter()
        .map(|m| simulate_trajectory(graph, horizon, trajectory_seed(master_seed, m), stop_at_consensus))
        .collect::<Result<Vec<_>>>()?;
    Ensemble::new(list, Some(master_seed))
}
