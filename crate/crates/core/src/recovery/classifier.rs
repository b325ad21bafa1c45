use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bits;
use crate::dynamics::{Ensemble, Trajectory};
use crate::error::{Error, Result};

/// Which steps of a trajectory feed the classifier sums.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EpochWindow {
    /// Epochs `t_s = s t*` with `t_s + 1 ≤ min{T_m, n}`.
    #[default]
    CappedAtN,
    /// Epochs `t_s = s t*` with `t_s + 1 ≤ T_m`.
    Full,
}

/// Integer scores `S_{i→j} = Σ_m Σ_s x_{m,i}^{(t_s+1)} x_{m,j}^{(t_s)}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassifierMatrix {
    n: usize,
    scores: Vec<i64>,
    t_star: u64,
    max_epochs: u64,
    total_epochs: u64,
    trajectories: usize,
}

impl ClassifierMatrix {
    /// Wraps a precomputed row-major `n × n` score matrix.
    pub fn from_scores(n: usize, scores: Vec<i64>) -> Result<Self> {
        if scores.len() != n * n {
            return Err(Error::arg(format!(
                "{} scores do not form a {n} x {n} matrix",
                scores.len()
            )));
        }
        Ok(ClassifierMatrix {
            n,
            scores,
            t_star: 1,
            max_epochs: 0,
            total_epochs: 0,
            trajectories: 0,
        })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn score(&self, i: usize, j: usize) -> i64 {
        self.scores[i * self.n + j]
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[i64] {
        &self.scores[i * self.n..(i + 1) * self.n]
    }

    pub fn scores(&self) -> &[i64] {
        &self.scores
    }

    pub fn t_star(&self) -> u64 {
        self.t_star
    }

    /// `T*`: the largest number of epochs taken from one trajectory.
    pub fn max_epochs(&self) -> u64 {
        self.max_epochs
    }

    /// Epochs summed over all trajectories.
    pub fn total_epochs(&self) -> u64 {
        self.total_epochs
    }

    /// `M`: trajectories in the source ensemble.
    pub fn trajectories(&self) -> usize {
        self.trajectories
    }
}

/// Number of epochs `s = 0, 1, ...` with `s t* + 1 ≤ limit`.
fn epoch_count(limit: u64, t_star: u64) -> u64 {
    if limit == 0 {
        0
    } else {
        (limit - 1) / t_star + 1
    }
}

pub(super) fn epochs_of(tr: &Trajectory, t_star: u64, window: EpochWindow) -> u64 {
    let limit = match window {
        EpochWindow::CappedAtN => tr.effective_horizon().min(tr.n() as u64),
        EpochWindow::Full => tr.effective_horizon(),
    };
    epoch_count(limit, t_star)
}

/// Classifier matrix with the default window (at most `n` steps per
/// trajectory). With `t_star = 1` every consecutive pair of stored states
/// up to `min{T_m, n}` contributes.
pub fn classifier_matrix(ensemble: &Ensemble, t_star: u64) -> Result<ClassifierMatrix> {
    classifier_matrix_with(ensemble, t_star, EpochWindow::CappedAtN)
}

pub fn classifier_matrix_with(ensemble: &Ensemble, t_star: u64, window: EpochWindow) -> Result<ClassifierMatrix> {
    if t_star == 0 {
        return Err(Error::arg("t_star must be at least 1"));
    }
    let counts: Vec<u64> = ensemble
        .trajectories()
        .iter()
        .map(|tr| epochs_of(tr, t_star, window))
        .collect();
    let epochs = counts.iter().enumerate().flat_map(|(m, &k)| (0..k).map(move |s| (m, s * t_star)));
    let (scores, total) = accumulate(ensemble, epochs);
    Ok(ClassifierMatrix {
        n: ensemble.n(),
        scores,
        t_star,
        max_epochs: counts.iter().copied().max().unwrap_or(0),
        total_epochs: total,
        trajectories: ensemble.len(),
    })
}

/// Sums `x_{m,i}^{(t+1)} x_{m,j}^{(t)}` over the listed `(m, t)` epochs.
///
/// Each vertex gets two bit strings over the epochs: `A_i` holds
/// `x_i^{(t+1)}` and `B_j` holds `x_j^{(t)}`. A product is `+1` where the
/// bits agree, so `S_{i→j} = K − 2 popcount(A_i ⊕ B_j)` for `K` epochs.
pub(super) fn accumulate(ensemble: &Ensemble, epochs: impl Iterator<Item = (usize, u64)>) -> (Vec<i64>, u64) {
    let n = ensemble.n();
    let epochs: Vec<(usize, u64)> = epochs.collect();
    let k = epochs.len();
    let words = bits::words_for(k);
    let mut after = vec![0u64; n * words];
    let mut before = vec![0u64; n * words];
    for (e, &(m, t)) in epochs.iter().enumerate() {
        let tr = &ensemble.trajectories()[m];
        let (now, next) = (tr.state(t), tr.state(t + 1));
        let (w, bit) = (e / 64, 1u64 << (e % 64));
        for i in 0..n {
            if bits::get(next, i) {
                after[i * words + w] |= bit;
            }
            if bits::get(now, i) {
                before[i * words + w] |= bit;
            }
        }
    }
    let mut scores = vec![0i64; n * n];
    if k > 0 {
        scores.par_chunks_mut(n).enumerate().for_each(|(i, row)| {
            let a = &after[i * words..(i + 1) * words];
            for (j, out) in row.iter_mut().enumerate() {
                let b = &before[j * words..(j + 1) * words];
                *out = k as i64 - 2 * bits::count_xor(a, b) as i64;
            }
        });
    }
    (scores, k as u64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::simulate_ensemble;
    use crate::graph::gen_fixed_outdegree;

    /// Direct double loop over trajectories and epochs.
    fn reference(ensemble: &Ensemble, t_star: u64, window: EpochWindow) -> Vec<i64> {
        let n = ensemble.n();
        let mut s = vec![0i64; n * n];
        for tr in ensemble.trajectories() {
            let limit = match window {
                EpochWindow::CappedAtN => tr.effective_horizon().min(n as u64),
                EpochWindow::Full => tr.effective_horizon(),
            };
            let mut t = 0;
            while t < limit {
                for i in 0..n {
                    for j in 0..n {
                        s[i * n + j] += (tr.opinion(t + 1, i) * tr.opinion(t, j)) as i64;
                    }
                }
                t += t_star;
            }
        }
        s
    }

    #[test]
    fn single_trajectory_with_repeated_state() {
        let states = vec![vec![1, -1, 1], vec![1, -1, 1], vec![-1, -1, 1]];
        let tr = Trajectory::from_opinions(&states).unwrap();
        let e = Ensemble::new(vec![tr], None).unwrap();
        let c = classifier_matrix(&e, 1).unwrap();
        assert_eq!(c.max_epochs(), 2);
        // s = 0 contributes x_i^{(1)} x_j^{(0)} = x_i^{(0)} x_j^{(0)}
        for i in 0..3 {
            for j in 0..3 {
                let want = (states[1][i] * states[0][j] + states[2][i] * states[1][j]) as i64;
                assert_eq!(c.score(i, j), want);
            }
        }
        assert_eq!(c.scores(), reference(&e, 1, EpochWindow::CappedAtN).as_slice());
    }

    #[test]
    fn matches_reference_summation() {
        let g = gen_fixed_outdegree(70, &[2, 3, 4], 5).unwrap();
        let e = simulate_ensemble(&g, 6, 200, 17, true).unwrap();
        for t_star in [1, 2, 3, 7] {
            for window in [EpochWindow::CappedAtN, EpochWindow::Full] {
                let c = classifier_matrix_with(&e, t_star, window).unwrap();
                assert_eq!(c.scores(), reference(&e, t_star, window).as_slice());
                let bound = (c.trajectories() as u64 * c.max_epochs()) as i64;
                assert!(c.scores().iter().all(|s| s.abs() <= bound));
            }
        }
    }

    #[test]
    fn consensus_at_zero_gives_zero_scores() {
        let tr = Trajectory::from_opinions(&[vec![1; 5]]).unwrap();
        let e = Ensemble::new(vec![tr.clone(), tr], None).unwrap();
        let c = classifier_matrix(&e, 1).unwrap();
        assert_eq!(c.max_epochs(), 0);
        assert!(c.scores().iter().all(|&s| s == 0));
        assert!(classifier_matrix(&e, 0).is_err());
    }

    #[test]
    fn thread_count_does_not_matter() {
        let g = gen_fixed_outdegree(90, &[3], 2).unwrap();
        let e = simulate_ensemble(&g, 3, 300, 1, true).unwrap();
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| classifier_matrix(&e, 1).unwrap())
        };
        assert_eq!(run(1), run(3));
    }
}
