use super::Trajectory;
use crate::bits;
use crate::error::{Error, Result};

fn check_pi(trajectory: &Trajectory, pi: &[f64]) -> Result<()> {
    if pi.len() != trajectory.n() {
        return Err(Error::arg(format!(
            "distribution has length {}, trajectory has n = {}",
            pi.len(),
            trajectory.n()
        )));
    }
    Ok(())
}

fn weighted(state: &[u64], pi: &[f64]) -> f64 {
    pi.iter()
        .enumerate()
        .map(|(i, &w)| if bits::get(state, i) { w } else { -w })
        .sum()
}

/// `W^{(t)} = Σ_i π(i) x_i^{(t)}`, for any `t` up to the requested horizon.
pub fn weighted_mean_opinion(trajectory: &Trajectory, pi: &[f64], t: u64) -> Result<f64> {
    check_pi(trajectory, pi)?;
    let state = trajectory
        .state_at(t)
        .ok_or_else(|| Error::arg(format!("time {t} beyond horizon {}", trajectory.horizon())))?;
    Ok(weighted(state, pi))
}

/// First `t ≤ min{T, n}` with `|W^{(t)}| > 1/2`, or `min{T, n}` if none.
pub fn effective_time(trajectory: &Trajectory, pi: &[f64]) -> Result<u64> {
    check_pi(trajectory, pi)?;
    let cap = trajectory.horizon().min(trajectory.n() as u64);
    let last = trajectory.effective_horizon().min(cap);
    // beyond T_m the state is frozen at consensus, where |W| = 1
    for t in 0..=last {
        if weighted(trajectory.state(t), pi).abs() > 0.5 {
            return Ok(t);
        }
    }
    Ok(cap)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::simulate_from;
    use crate::graph::DirectedGraph;

    #[test]
    fn hand_examples() {
        let tr = Trajectory::from_opinions(&[vec![1, -1, 1]]).unwrap();
        let w = weighted_mean_opinion(&tr, &[0.4, 0.2, 0.4], 0).unwrap();
        assert!((w - 0.6).abs() < 1e-15);

        let tr = Trajectory::from_opinions(&[vec![1, -1, 1, -1]]).unwrap();
        assert_eq!(weighted_mean_opinion(&tr, &[0.25; 4], 0).unwrap(), 0.0);

        let tr = Trajectory::from_opinions(&[vec![1; 3]]).unwrap();
        assert_eq!(weighted_mean_opinion(&tr, &[0.2, 0.3, 0.5], 0).unwrap(), 1.0);
        assert_eq!(effective_time(&tr, &[0.2, 0.3, 0.5]).unwrap(), 0);

        assert!(weighted_mean_opinion(&tr, &[0.5, 0.5], 0).is_err());
        assert!(weighted_mean_opinion(&tr, &[0.2, 0.3, 0.5], 1).is_err());
    }

    #[test]
    fn two_cycle_never_tips() {
        let g = DirectedGraph::cycle(2);
        for horizon in [0, 1, 2, 10] {
            let tr = simulate_from(&g, &[1, -1], horizon, 1, true).unwrap();
            assert_eq!(effective_time(&tr, &[0.5, 0.5]).unwrap(), horizon.min(2));
        }
    }
}
