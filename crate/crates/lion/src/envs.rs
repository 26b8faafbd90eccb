//! Environment registry and TOML environment configs.
//!
//! Config file schema (every field optional, defaults shown):
//!
//! ```toml
//! [env]
//! kind = "world2d"            # or "partial_obs"
//! reward_center = [3.0, 6.0]
//! reward_scale = [1.5, 1.5]
//! step_scale = 0.5
//! episode_length = 30
//! bounds = { low = [0.0, 0.0], high = [10.0, 10.0] }
//!
//! # partial_obs instead nests the world under `base` and adds the momentum:
//! # [env]
//! # kind = "partial_obs"
//! # hidden_momentum = 0.8
//! # [env.base]
//! # step_scale = 0.2
//!
//! [data_policy]
//! goals = [[2.5, 2.5], [7.5, 7.5]]
//! explore_eps = 0.1
//! arrive_tolerance = 0.25
//! ```

use std::path::Path;

use lion_core::data::Dataset;
use lion_core::envs::{
    baseline_policy_2d, collect_dataset, Env2DConfig, Environment, GoalPolicyConfig, PartialObsConfig, PartialObsWorld,
    World2D,
};
use lion_core::rng::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const ENV_NAMES: [&str; 2] = ["world2d", "partial_obs"];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EnvConfig {
    World2d(Env2DConfig),
    PartialObs(PartialObsConfig),
}

impl Default for EnvConfig {
    fn default() -> Self {
        EnvConfig::World2d(Env2DConfig::default())
    }
}

impl EnvConfig {
    /// Default configuration of a registered environment.
    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "world2d" => Ok(EnvConfig::World2d(Env2DConfig::default())),
            "partial_obs" => Ok(EnvConfig::PartialObs(PartialObsConfig::default())),
            _ => Err(Error::UnknownEnv {
                name: name.into(),
                available: ENV_NAMES.iter().map(|s| s.to_string()).collect(),
            }),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            EnvConfig::World2d(_) => "world2d",
            EnvConfig::PartialObs(_) => "partial_obs",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            EnvConfig::World2d(c) => c.validate()?,
            EnvConfig::PartialObs(c) => c.validate()?,
        }
        Ok(())
    }

    pub fn build(&self) -> Result<AnyEnv> {
        self.validate()?;
        Ok(match self {
            EnvConfig::World2d(c) => AnyEnv::World2d(World2D::new(c.clone())),
            EnvConfig::PartialObs(c) => AnyEnv::PartialObs(PartialObsWorld::new(c.clone())),
        })
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EnvFile {
    pub env: EnvConfig,
    pub data_policy: GoalPolicyConfig,
}

impl EnvFile {
    pub fn parse(text: &str) -> Result<Self> {
        let f: EnvFile = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        f.env.validate()?;
        let bounds = &f.env.reward_config().bounds;
        f.data_policy.validate(bounds)?;
        Ok(f)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
    }
}

/// Any registered environment behind one type.
#[derive(Clone, Debug, PartialEq)]
pub enum AnyEnv {
    World2d(World2D),
    PartialObs(PartialObsWorld),
}

#[derive(Clone, Debug, PartialEq)]
pub enum AnyState {
    World2d([f64; 2]),
    PartialObs([f64; 4]),
}

impl EnvConfig {
    /// The reward landscape and bounds shared by both worlds.
    pub fn reward_config(&self) -> &Env2DConfig {
        match self {
            EnvConfig::World2d(c) => c,
            EnvConfig::PartialObs(c) => &c.base,
        }
    }
}

impl AnyEnv {
    pub fn reward_config(&self) -> &Env2DConfig {
        match self {
            AnyEnv::World2d(e) => &e.cfg,
            AnyEnv::PartialObs(e) => &e.cfg.base,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            AnyEnv::World2d(_) => "world2d",
            AnyEnv::PartialObs(_) => "partial_obs",
        }
    }
}

impl Environment for AnyEnv {
    type State = AnyState;

    fn observation_dim(&self) -> usize {
        match self {
            AnyEnv::World2d(e) => e.observation_dim(),
            AnyEnv::PartialObs(e) => e.observation_dim(),
        }
    }

    fn action_dim(&self) -> usize {
        match self {
            AnyEnv::World2d(e) => e.action_dim(),
            AnyEnv::PartialObs(e) => e.action_dim(),
        }
    }

    fn episode_length(&self) -> usize {
        match self {
            AnyEnv::World2d(e) => e.episode_length(),
            AnyEnv::PartialObs(e) => e.episode_length(),
        }
    }

    fn sample_start(&self, rng: &mut Rng) -> AnyState {
        match self {
            AnyEnv::World2d(e) => AnyState::World2d(e.sample_start(rng)),
            AnyEnv::PartialObs(e) => AnyState::PartialObs(e.sample_start(rng)),
        }
    }

    fn observe(&self, state: &AnyState) -> Vec<f64> {
        match (self, state) {
            (AnyEnv::World2d(e), AnyState::World2d(s)) => e.observe(s),
            (AnyEnv::PartialObs(e), AnyState::PartialObs(s)) => e.observe(s),
            _ => panic!("state does not belong to {}", self.name()),
        }
    }

    fn step(&self, state: &AnyState, action: &[f64]) -> (AnyState, f64) {
        match (self, state) {
            (AnyEnv::World2d(e), AnyState::World2d(s)) => {
                let (n, r) = e.step(s, action);
                (AnyState::World2d(n), r)
            }
            (AnyEnv::PartialObs(e), AnyState::PartialObs(s)) => {
                let (n, r) = e.step(s, action);
                (AnyState::PartialObs(n), r)
            }
            _ => panic!("state does not belong to {}", self.name()),
        }
    }
}

/// Goal-policy dataset of exactly `n_interactions` transitions; the policy acts on observations.
pub fn collect(env: &AnyEnv, policy: &GoalPolicyConfig, n_interactions: usize, seed: u64) -> Result<Dataset> {
    if n_interactions == 0 {
        return Err(Error::Config("n_interactions must be positive".into()));
    }
    policy.validate(&env.reward_config().bounds)?;
    Ok(collect_dataset(
        env,
        |s, rng| baseline_policy_2d([s[0], s[1]], policy, rng).to_vec(),
        n_interactions,
        seed,
        "goal_2d",
        policy.explore_eps,
    ))
}
