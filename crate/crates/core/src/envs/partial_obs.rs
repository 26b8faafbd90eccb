use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use super::world2d::{reward_2d, Env2DConfig};
use super::{clamp_unit, Environment};
use crate::rng::{uniform, Rng};
use crate::{Error, Result};

/// Double integrator in the 2D world where only position is observed.
///
/// Internal state is `[x, y, vx, vy]`; `v' = m·v + Δ·a`, `p' = clip(p + v')`.
/// A velocity component is zeroed when its position hits a wall.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PartialObsConfig {
    pub base: Env2DConfig,
    pub hidden_momentum: f64,
}

impl Default for PartialObsConfig {
    fn default() -> Self {
        Self {
            base: Env2DConfig {
                step_scale: 0.2,
                ..Env2DConfig::default()
            },
            hidden_momentum: 0.8,
        }
    }
}

impl PartialObsConfig {
    pub fn validate(&self) -> Result<()> {
        self.base.validate()?;
        if !(0.0..1.0).contains(&self.hidden_momentum) {
            return Err(Error::InvalidConfig("hidden_momentum must be in [0, 1)".into()));
        }
        Ok(())
    }
}

/// Returns `(observation, reward, internal_state')`.
pub fn po_env_step(state: [f64; 4], action: [f64; 2], cfg: &PartialObsConfig) -> ([f64; 2], f64, [f64; 4]) {
    let (a, _) = clamp_unit(&action);
    let b = &cfg.base.bounds;
    let mut next = [0.0; 4];
    for i in 0..2 {
        let v = cfg.hidden_momentum * state[2 + i] + cfg.base.step_scale * a[i];
        let p = state[i] + v;
        let clipped = p.clamp(b.low[i], b.high[i]);
        next[i] = clipped;
        next[2 + i] = if clipped == p { v } else { 0.0 };
    }
    let obs = [next[0], next[1]];
    (obs, reward_2d(obs, &cfg.base), next)
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PartialObsWorld {
    pub cfg: PartialObsConfig,
}

impl PartialObsWorld {
    pub fn new(cfg: PartialObsConfig) -> Self {
        Self { cfg }
    }
}

impl Environment for PartialObsWorld {
    type State = [f64; 4];

    fn observation_dim(&self) -> usize {
        2
    }

    fn action_dim(&self) -> usize {
        2
    }

    fn episode_length(&self) -> usize {
        self.cfg.base.episode_length
    }

    fn sample_start(&self, rng: &mut Rng) -> [f64; 4] {
        let b = &self.cfg.base.bounds;
        [uniform(rng, b.low[0], b.high[0]), uniform(rng, b.low[1], b.high[1]), 0.0, 0.0]
    }

    fn observe(&self, state: &[f64; 4]) -> Vec<f64> {
        state[..2].to_vec()
    }

    fn step(&self, state: &[f64; 4], action: &[f64]) -> ([f64; 4], f64) {
        let (_, r, next) = po_env_step(*state, [action[0], action[1]], &self.cfg);
        (next, r)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn memoryless_zero_action_is_stationary() {
        let cfg = PartialObsConfig {
            hidden_momentum: 0.0,
            ..Default::default()
        };
        let (obs, _, next) = po_env_step([4.0, 5.0, 0.0, 0.0], [0.0, 0.0], &cfg);
        assert_eq!(obs, [4.0, 5.0]);
        assert_eq!(next, [4.0, 5.0, 0.0, 0.0]);
    }

    #[test]
    fn constant_action_velocity_converges_to_geometric_limit() {
        let cfg = PartialObsConfig {
            base: Env2DConfig {
                step_scale: 0.01,
                bounds: super::super::Bounds {
                    low: [-1e6, -1e6],
                    high: [1e6, 1e6],
                },
                reward_center: [0.0, 0.0],
                ..Env2DConfig::default()
            },
            hidden_momentum: 0.7,
        };
        let a = [0.5, -1.0];
        let mut s = [0.0, 0.0, 0.0, 0.0];
        for _ in 0..200 {
            s = po_env_step(s, a, &cfg).2;
        }
        // v* = Δ·a / (1 − m)
        for i in 0..2 {
            let limit = 0.01 * a[i] / (1.0 - 0.7);
            assert!((s[2 + i] - limit).abs() < 1e-12);
        }
    }

    #[test]
    fn observation_is_position() {
        let cfg = PartialObsConfig::default();
        let mut s = [1.0, 9.0, 0.3, -0.4];
        for k in 0..50 {
            let a = [(k as f64 * 0.7).sin(), (k as f64 * 0.3).cos()];
            let (obs, _, next) = po_env_step(s, a, &cfg);
            assert_eq!(obs, [next[0], next[1]]);
            assert!(cfg.base.bounds.contains(obs));
            s = next;
        }
    }

    #[test]
    fn momentum_must_be_stable() {
        let cfg = PartialObsConfig {
            hidden_momentum: 1.0,
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
    }
}
