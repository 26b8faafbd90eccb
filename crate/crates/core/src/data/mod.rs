//! Trajectory containers, normalization statistics and splits.

mod norm;
mod split;

pub use norm::{compute_norm_stats, NormStats, STD_FLOOR};
pub use split::split;

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Transition {
    pub state: Vec<f64>,
    pub action: Vec<f64>,
    pub reward: f64,
    pub next_state: Vec<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryMeta {
    pub policy: String,
    pub explore_eps: f64,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub episode_id: u64,
    pub transitions: Vec<Transition>,
    pub meta: TrajectoryMeta,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.transitions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.transitions.is_empty()
    }

    /// Undiscounted reward sums from each step to the end of the trajectory.
    pub fn returns_to_go(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.len());
        let mut acc = 0.0;
        for t in self.transitions.iter().rev() {
            acc += t.reward;
            out.push(acc);
        }
        out.reverse();
        out
    }
}

/// A fixed offline dataset; the only input to every trainer.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub state_dim: usize,
    pub action_dim: usize,
    pub trajectories: Vec<Trajectory>,
}

impl Dataset {
    pub fn n_transitions(&self) -> usize {
        self.trajectories.iter().map(Trajectory::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.n_transitions() == 0
    }

    pub fn transitions(&self) -> impl Iterator<Item = &Transition> {
        self.trajectories.iter().flat_map(|t| t.transitions.iter())
    }

    pub fn states(&self) -> Vec<Vec<f64>> {
        self.transitions().map(|t| t.state.clone()).collect()
    }

    /// Checks dimensions, finiteness, action range and trajectory chaining.
    pub fn validate(&self) -> Result<()> {
        for traj in &self.trajectories {
            for (i, t) in traj.transitions.iter().enumerate() {
                let at = || format!("episode {} step {}", traj.episode_id, i);
                if t.state.len() != self.state_dim || t.next_state.len() != self.state_dim {
                    return Err(Error::InvalidDataset(format!(
                        "{}: state dimension {} (expected {})",
                        at(),
                        t.state.len(),
                        self.state_dim
                    )));
                }
                if t.action.len() != self.action_dim {
                    return Err(Error::InvalidDataset(format!(
                        "{}: action dimension {} (expected {})",
                        at(),
                        t.action.len(),
                        self.action_dim
                    )));
                }
                let finite = t.state.iter().chain(&t.next_state).chain(&t.action).all(|v| v.is_finite())
                    && t.reward.is_finite();
                if !finite {
                    return Err(Error::InvalidDataset(format!("{}: non-finite value", at())));
                }
                if t.action.iter().any(|a| !(-1.0..=1.0).contains(a)) {
                    return Err(Error::InvalidDataset(format!("{}: action outside [-1, 1]", at())));
                }
                if let Some(next) = traj.transitions.get(i + 1) {
                    if next.state != t.next_state {
                        return Err(Error::InvalidDataset(format!("{}: next_state does not chain", at())));
                    }
                }
            }
        }
        Ok(())
    }
}
