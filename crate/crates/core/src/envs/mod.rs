//! Ground-truth environments and the data-collecting goal policy.

mod collect;
mod partial_obs;
mod world2d;

pub use collect::collect_dataset;
pub use partial_obs::{po_env_step, PartialObsConfig, PartialObsWorld};
pub use world2d::{
    baseline_policy_2d, env2d_step, reward_2d, Bounds, Env2DConfig, GoalPolicyConfig, Step2D, World2D,
};

use alloc::vec::Vec;

use crate::rng::Rng;

/// A fixed-length episodic simulator with a directly observable part of its state.
pub trait Environment {
    type State: Clone;

    fn observation_dim(&self) -> usize;
    fn action_dim(&self) -> usize;
    fn episode_length(&self) -> usize;
    fn sample_start(&self, rng: &mut Rng) -> Self::State;
    fn observe(&self, state: &Self::State) -> Vec<f64>;
    /// Applies `action` and returns the successor state and its reward.
    fn step(&self, state: &Self::State, action: &[f64]) -> (Self::State, f64);
}

pub(crate) fn clamp_unit(action: &[f64]) -> (Vec<f64>, bool) {
    let mut clamped = false;
    let out = action
        .iter()
        .map(|&a| {
            let c = a.clamp(-1.0, 1.0);
            clamped |= c != a;
            c
        })
        .collect();
    (out, clamped)
}
