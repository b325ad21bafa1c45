//! Voter-model dynamics on directed graphs and exact recovery of the latent
//! graph from observed opinion trajectories.
//!
//! The crate is organised bottom-up:
//!
//! - [`graph`]: directed graphs, random generators, edge-list I/O, stationary
//!   distributions and admissibility diagnostics.
//! - [`dynamics`]: synchronous voter-model simulation with bit-packed
//!   storage, the coalescing-random-walk dual, and trajectory diagnostics.
//! - [`recovery`]: classifier matrices, 2-clustering and graph recovery.
//! - [`likelihood`]: exact log-likelihood of candidate graphs, flipping
//!   graphs and per-triple statistics.
//! - [`eval`]: scoring, the recovery threshold law and the experiment runner.
//!
//! Every random quantity is derived from a 64-bit seed through the
//! counter-based mixer in [`seed`], so results are bit-identical regardless
//! of how work is scheduled across threads.

pub mod bits;
pub mod dynamics;
pub mod error;
pub mod eval;
pub mod graph;
pub mod likelihood;
pub mod recovery;
pub mod seed;
mod sum;

pub use error::{Error, Result};
