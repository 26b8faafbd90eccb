use alloc::format;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use super::eval::{behavior_distance, distance_states, lambda_sweep, LambdaSweepResult, SweepConfig};
use super::report::{AblationKind, AblationReport, Finding, SettingScore};
use crate::data::Dataset;
use crate::envs::Environment;
use crate::exec::Executor;
use crate::lion::{compute_penalty, train_lion_observed, LionPolicy, LionTrainConfig};
use crate::models::{Aggregation, BehaviorNet, DynamicsEnsemble};
use crate::{Error, Result};

/// Mean squared difference between π(s, 0) and the dataset's own actions.
pub fn dataset_action_mse(policy: &LionPolicy, dataset: &Dataset) -> Result<f64> {
    if dataset.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut total = 0.0;
    for t in dataset.transitions() {
        total += compute_penalty(&t.action, &policy.act(&t.state, 0.0)?);
    }
    Ok(total / dataset.n_transitions() as f64)
}

/// Sorted, deduplicated copy of `values` (exact equality).
pub fn sorted_unique(values: &[f64]) -> Result<Vec<f64>> {
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidConfig("settings must be finite".into()));
    }
    let mut out = values.to_vec();
    out.sort_by(f64::total_cmp);
    out.dedup();
    if out.is_empty() {
        return Err(Error::InvalidConfig("at least one setting required".into()));
    }
    Ok(out)
}

pub fn score(policy: &LionPolicy, behavior: &BehaviorNet, dataset: &Dataset, setting: f64, states: &[Vec<f64>]) -> Result<SettingScore> {
    Ok(SettingScore {
        setting,
        behavior_mismatch: behavior_distance(policy, behavior, 0.0, states)?,
        dataset_action_mse: dataset_action_mse(policy, dataset)?,
    })
}

/// Trains one policy per configuration; results are in input order.
pub fn train_settings<X: Executor>(
    dataset: &Dataset,
    ensemble: &DynamicsEnsemble,
    behavior: &BehaviorNet,
    configs: Vec<LionTrainConfig>,
    exec: &X,
) -> Result<Vec<LionPolicy>> {
    exec.map(configs, |cfg| {
        train_lion_observed(dataset, ensemble, behavior, &cfg, exec, |_, _| {}).map(|t| t.policy)
    })
    .into_iter()
    .collect()
}

/// Configurations for a symmetric Beta(a, a) sweep.
pub fn beta_configs(base: &LionTrainConfig, params: &[f64]) -> Result<(Vec<f64>, Vec<LionTrainConfig>)> {
    let settings = sorted_unique(params)?;
    let cfgs = settings
        .iter()
        .map(|&a| LionTrainConfig {
            beta_a: a,
            beta_b: a,
            ..base.clone()
        })
        .collect();
    Ok((settings, cfgs))
}

pub fn eta_configs(base: &LionTrainConfig, etas: &[f64]) -> Result<(Vec<f64>, Vec<LionTrainConfig>)> {
    let settings = sorted_unique(etas)?;
    let cfgs = settings.iter().map(|&eta| LionTrainConfig { eta, ..base.clone() }).collect();
    Ok((settings, cfgs))
}

/// λ = 0 mismatch for policies trained with different Beta(a, a) samplers.
pub fn beta_report(
    settings: &[f64],
    policies: &[LionPolicy],
    behavior: &BehaviorNet,
    dataset: &Dataset,
    sweep: &SweepConfig,
) -> Result<AblationReport> {
    let states = distance_states(dataset, sweep.distance_states, sweep.seed);
    let scores = settings
        .iter()
        .zip(policies)
        .map(|(&a, p)| score(p, behavior, dataset, a, &states))
        .collect::<Result<Vec<_>>>()?;
    let mut findings = Vec::new();
    if scores.len() > 1 {
        let (first, last) = (&scores[0], &scores[scores.len() - 1]);
        findings.push(Finding::new(
            "flatter_beta_degrades_lambda_zero",
            "a flatter lambda distribution reproduces the behavior policy less accurately at lambda = 0",
            last.behavior_mismatch > first.behavior_mismatch,
            format!(
                "mismatch {:.5} at a = {} vs {:.5} at a = {}",
                last.behavior_mismatch, last.setting, first.behavior_mismatch, first.setting
            ),
        ));
    }
    Ok(AblationReport {
        kind: AblationKind::Beta,
        scores,
        findings,
    })
}

/// λ = 0 dataset-action adherence for policies trained with different η.
pub fn eta_report(
    settings: &[f64],
    policies: &[LionPolicy],
    behavior: &BehaviorNet,
    dataset: &Dataset,
    sweep: &SweepConfig,
) -> Result<AblationReport> {
    let states = distance_states(dataset, sweep.distance_states, sweep.seed);
    let scores = settings
        .iter()
        .zip(policies)
        .map(|(&eta, p)| score(p, behavior, dataset, eta, &states))
        .collect::<Result<Vec<_>>>()?;
    let mut findings = Vec::new();
    if let (Some(zero), true) = (scores.iter().find(|s| s.setting == 0.0), scores.len() > 1) {
        let best_nonzero = scores
            .iter()
            .filter(|s| s.setting > 0.0)
            .map(|s| s.dataset_action_mse)
            .fold(f64::INFINITY, f64::min);
        findings.push(Finding::new(
            "eta_zero_worse",
            "without the data anchor lambda = 0 adheres less to dataset actions",
            zero.dataset_action_mse > best_nonzero,
            format!("dataset-action mse {:.5} at eta = 0 vs best {:.5} with eta > 0", zero.dataset_action_mse, best_nonzero),
        ));
    }
    Ok(AblationReport {
        kind: AblationKind::Eta,
        scores,
        findings,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AggregationReport {
    pub modes: Vec<Aggregation>,
    pub sweeps: Vec<LambdaSweepResult>,
    pub return_at_one: Vec<f64>,
    pub findings: Vec<Finding>,
}

impl AggregationReport {
    pub fn is_well_formed(&self) -> bool {
        let n = self.modes.len();
        let unique = (0..n).all(|i| !self.modes[..i].contains(&self.modes[i]));
        unique && self.sweeps.len() == n && self.return_at_one.len() == n
    }
}

/// Requested modes in canonical order (min, mean, single), each once.
pub fn unique_modes(modes: &[Aggregation]) -> Vec<Aggregation> {
    Aggregation::ALL.iter().copied().filter(|m| modes.contains(m)).collect()
}

/// Trains one policy per aggregation mode on the same members.
pub fn train_aggregation<X: Executor>(
    dataset: &Dataset,
    ensemble: &DynamicsEnsemble,
    behavior: &BehaviorNet,
    modes: &[Aggregation],
    cfg: &LionTrainConfig,
    exec: &X,
) -> Result<Vec<LionPolicy>> {
    let modes = unique_modes(modes);
    exec.map(modes, |m| {
        let e = ensemble.clone().with_mode(m);
        train_lion_observed(dataset, &e, behavior, cfg, exec, |_, _| {}).map(|t| t.policy)
    })
    .into_iter()
    .collect()
}

/// λ-sweeps per mode and the return each reaches at λ = 1.
pub fn aggregation_report<E: Environment + Sync, X: Executor>(
    env: &E,
    modes: &[Aggregation],
    policies: &[LionPolicy],
    behavior: &BehaviorNet,
    dataset: &Dataset,
    sweep: &SweepConfig,
    exec: &X,
) -> Result<AggregationReport> {
    let modes = unique_modes(modes);
    if policies.len() != modes.len() {
        return Err(Error::InvalidConfig("one policy per aggregation mode required".into()));
    }
    let sweeps = exec
        .map(policies.iter().collect(), |p| lambda_sweep(env, p, behavior, dataset, sweep))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let return_at_one: Vec<f64> = sweeps
        .iter()
        .map(|s| s.at(1.0).map(|i| s.mean_return[i]).unwrap_or(f64::NAN))
        .collect();
    let mut findings = Vec::new();
    let get = |m: Aggregation| modes.iter().position(|&x| x == m).map(|i| return_at_one[i]);
    if let (Some(min), Some(mean), Some(single)) = (get(Aggregation::Min), get(Aggregation::Mean), get(Aggregation::Single)) {
        findings.push(Finding::new(
            "aggregation_ordering",
            "return at lambda = 1: min >= mean >= single",
            min >= mean && mean >= single,
            format!("min {min:.4}, mean {mean:.4}, single {single:.4}"),
        ));
    }
    Ok(AggregationReport {
        modes,
        sweeps,
        return_at_one,
        findings,
    })
}
