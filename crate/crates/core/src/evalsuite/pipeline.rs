use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::data::{compute_norm_stats, split, Dataset, NormStats};
use crate::envs::{baseline_policy_2d, collect_dataset, Env2DConfig, GoalPolicyConfig, World2D};
use crate::exec::Executor;
use crate::lion::LionTrainConfig;
use crate::models::{
    train_behavior, train_dynamics_member, train_dynamics_recurrent, Aggregation, BehaviorConfig, BehaviorNet,
    DynamicsConfig, DynamicsEnsemble, MemberTraining,
};
use crate::rng::derive_seed;
use crate::Result;

/// Settings of the full 2D-world experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub env: Env2DConfig,
    pub data_policy: GoalPolicyConfig,
    pub n_interactions: usize,
    pub split_ratio: f64,
    pub ensemble_size: usize,
    pub aggregation: Aggregation,
    pub dynamics: DynamicsConfig,
    pub behavior: BehaviorConfig,
    pub lion: LionTrainConfig,
    pub seed: u64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            env: Env2DConfig::default(),
            data_policy: GoalPolicyConfig::default(),
            n_interactions: 1000,
            split_ratio: 0.9,
            ensemble_size: 4,
            aggregation: Aggregation::Min,
            dynamics: DynamicsConfig::default(),
            behavior: BehaviorConfig::default(),
            lion: LionTrainConfig::default(),
            seed: 0,
        }
    }
}

impl PipelineConfig {
    pub fn data_seed(&self) -> u64 {
        derive_seed(self.seed, 10)
    }

    pub fn split_seed(&self) -> u64 {
        derive_seed(self.seed, 11)
    }

    pub fn member_seeds(&self) -> Vec<u64> {
        (0..self.ensemble_size as u64).map(|i| derive_seed(self.seed, 100 + i)).collect()
    }

    pub fn behavior_seed(&self) -> u64 {
        derive_seed(self.seed, 12)
    }
}

/// Collects the goal-policy dataset in the 2D world.
pub fn collect_2d(cfg: &PipelineConfig) -> Dataset {
    let policy = cfg.data_policy.clone();
    collect_dataset(
        &World2D::new(cfg.env.clone()),
        |s, rng| baseline_policy_2d([s[0], s[1]], &policy, rng).to_vec(),
        cfg.n_interactions,
        cfg.data_seed(),
        "goal_2d",
        policy.explore_eps,
    )
}

/// Trains one member per seed and assembles the ensemble.
pub fn train_ensemble<X: Executor>(
    train: &Dataset,
    val: &Dataset,
    norm: &NormStats,
    cfg: &DynamicsConfig,
    seeds: &[u64],
    mode: Aggregation,
    exec: &X,
) -> Result<(DynamicsEnsemble, Vec<MemberTraining>)> {
    let reports = exec
        .map(seeds.to_vec(), |s| match cfg.recurrent {
            Some(_) => train_dynamics_recurrent(train, val, norm, cfg, s),
            None => train_dynamics_member(train, val, norm, cfg, s),
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    assemble_ensemble(reports, norm, train.action_dim, cfg, mode)
}

/// Builds an ensemble from already trained members.
pub fn assemble_ensemble(
    reports: Vec<MemberTraining>,
    norm: &NormStats,
    action_dim: usize,
    cfg: &DynamicsConfig,
    mode: Aggregation,
) -> Result<(DynamicsEnsemble, Vec<MemberTraining>)> {
    let members = reports.iter().map(|r| r.member.clone()).collect();
    let mut ensemble = DynamicsEnsemble::new(members, mode, norm.clone(), action_dim)?;
    if let Some(r) = &cfg.recurrent {
        ensemble = ensemble.with_recurrence(r.history, r.window);
    }
    Ok((ensemble, reports))
}

/// Frozen components that policy training consumes.
#[derive(Clone, Debug)]
pub struct Artifacts {
    pub dataset: Dataset,
    pub norm: NormStats,
    pub ensemble: DynamicsEnsemble,
    pub members: Vec<MemberTraining>,
    pub behavior: BehaviorNet,
}

/// Normalization over the full dataset, ensemble on the train split, behavior
/// clone on the full dataset.
pub fn train_models<X: Executor>(dataset: Dataset, cfg: &PipelineConfig, exec: &X) -> Result<Artifacts> {
    let norm = compute_norm_stats(&dataset)?;
    let (train, val) = split(&dataset, cfg.split_ratio, cfg.split_seed())?;
    let (ensemble, members) =
        train_ensemble(&train, &val, &norm, &cfg.dynamics, &cfg.member_seeds(), cfg.aggregation, exec)?;
    let behavior = train_behavior(&dataset, &cfg.behavior, cfg.behavior_seed())?.net;
    Ok(Artifacts {
        dataset,
        norm,
        ensemble,
        members,
        behavior,
    })
}
