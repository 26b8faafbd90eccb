use alloc::vec;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use super::{clamp_unit, Environment};
use crate::math;
use crate::rng::{uniform, Rng};
use crate::{Error, Result};

/// Axis-aligned box.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub low: [f64; 2],
    pub high: [f64; 2],
}

impl Bounds {
    pub fn contains(&self, p: [f64; 2]) -> bool {
        (0..2).all(|i| p[i] >= self.low[i] && p[i] <= self.high[i])
    }

    pub fn clip(&self, p: [f64; 2]) -> [f64; 2] {
        [p[0].clamp(self.low[0], self.high[0]), p[1].clamp(self.low[1], self.high[1])]
    }
}

impl Default for Bounds {
    fn default() -> Self {
        Self {
            low: [0.0, 0.0],
            high: [10.0, 10.0],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Env2DConfig {
    pub reward_center: [f64; 2],
    pub reward_scale: [f64; 2],
    pub bounds: Bounds,
    /// Displacement per unit action.
    pub step_scale: f64,
    pub episode_length: usize,
}

impl Default for Env2DConfig {
    fn default() -> Self {
        Self {
            reward_center: [3.0, 6.0],
            reward_scale: [1.5, 1.5],
            bounds: Bounds::default(),
            step_scale: 0.5,
            episode_length: 30,
        }
    }
}

impl Env2DConfig {
    pub fn validate(&self) -> Result<()> {
        if self.reward_scale.iter().any(|&s| !(s > 0.0)) {
            return Err(Error::InvalidConfig("reward_scale must be strictly positive".into()));
        }
        if !self.bounds.contains(self.reward_center) {
            return Err(Error::InvalidConfig("reward_center must lie inside bounds".into()));
        }
        if !(self.step_scale > 0.0) {
            return Err(Error::InvalidConfig("step_scale must be positive".into()));
        }
        if self.episode_length == 0 {
            return Err(Error::InvalidConfig("episode_length must be positive".into()));
        }
        Ok(())
    }
}

/// Product of per-axis Gaussian densities centred on `reward_center`.
pub fn reward_2d(state: [f64; 2], cfg: &Env2DConfig) -> f64 {
    let norm = 1.0 / math::sqrt(2.0 * core::f64::consts::PI);
    (0..2)
        .map(|i| {
            let s = cfg.reward_scale[i];
            let z = (state[i] - cfg.reward_center[i]) / s;
            norm / s * math::exp(-0.5 * z * z)
        })
        .product()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Step2D {
    pub state: [f64; 2],
    pub reward: f64,
    /// The action had components outside `[-1, 1]` and was clamped.
    pub clamped: bool,
}

/// `s' = clip(s + Δ·a)`, rewarded at `s'`.
pub fn env2d_step(state: [f64; 2], action: [f64; 2], cfg: &Env2DConfig) -> Step2D {
    let (a, clamped) = clamp_unit(&action);
    let next = cfg.bounds.clip([
        state[0] + cfg.step_scale * a[0],
        state[1] + cfg.step_scale * a[1],
    ]);
    Step2D {
        state: next,
        reward: reward_2d(next, cfg),
        clamped,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GoalPolicyConfig {
    pub goals: Vec<[f64; 2]>,
    pub explore_eps: f64,
    pub arrive_tolerance: f64,
}

impl Default for GoalPolicyConfig {
    fn default() -> Self {
        Self {
            goals: vec![[2.5, 2.5], [7.5, 7.5]],
            explore_eps: 0.1,
            arrive_tolerance: 0.25,
        }
    }
}

impl GoalPolicyConfig {
    pub fn validate(&self, bounds: &Bounds) -> Result<()> {
        if self.goals.is_empty() || self.goals.iter().any(|g| !bounds.contains(*g)) {
            return Err(Error::InvalidConfig("goals must be non-empty and inside bounds".into()));
        }
        if !(0.0..=1.0).contains(&self.explore_eps) {
            return Err(Error::InvalidConfig("explore_eps must be in [0, 1]".into()));
        }
        Ok(())
    }

    /// Nearest goal; ties go to the earlier goal.
    pub fn nearest_goal(&self, state: [f64; 2]) -> [f64; 2] {
        let d2 = |g: &[f64; 2]| {
            let (dx, dy) = (g[0] - state[0], g[1] - state[1]);
            dx * dx + dy * dy
        };
        let mut best = self.goals[0];
        for g in &self.goals[1..] {
            if d2(g) < d2(&best) {
                best = *g;
            }
        }
        best
    }

    /// The exploration-free action.
    pub fn greedy_action(&self, state: [f64; 2]) -> [f64; 2] {
        let g = self.nearest_goal(state);
        let d = [g[0] - state[0], g[1] - state[1]];
        if math::sqrt(d[0] * d[0] + d[1] * d[1]) <= self.arrive_tolerance {
            return [0.0, 0.0];
        }
        [d[0].clamp(-1.0, 1.0), d[1].clamp(-1.0, 1.0)]
    }
}

/// Goal-seeking data policy with ε-uniform exploration. Draws exactly one
/// coin per call plus two uniforms when exploring.
pub fn baseline_policy_2d(state: [f64; 2], cfg: &GoalPolicyConfig, rng: &mut Rng) -> [f64; 2] {
    if uniform(rng, 0.0, 1.0) < cfg.explore_eps {
        return [uniform(rng, -1.0, 1.0), uniform(rng, -1.0, 1.0)];
    }
    cfg.greedy_action(state)
}

/// The fully observed 2D world.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct World2D {
    pub cfg: Env2DConfig,
}

impl World2D {
    pub fn new(cfg: Env2DConfig) -> Self {
        Self { cfg }
    }
}

impl Environment for World2D {
    type State = [f64; 2];

    fn observation_dim(&self) -> usize {
        2
    }

    fn action_dim(&self) -> usize {
        2
    }

    fn episode_length(&self) -> usize {
        self.cfg.episode_length
    }

    fn sample_start(&self, rng: &mut Rng) -> [f64; 2] {
        let b = &self.cfg.bounds;
        [uniform(rng, b.low[0], b.high[0]), uniform(rng, b.low[1], b.high[1])]
    }

    fn observe(&self, state: &[f64; 2]) -> Vec<f64> {
        state.to_vec()
    }

    fn step(&self, state: &[f64; 2], action: &[f64]) -> ([f64; 2], f64) {
        let s = env2d_step(*state, [action[0], action[1]], &self.cfg);
        (s.state, s.reward)
    }
}
