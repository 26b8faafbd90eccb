use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use super::eval::{distance_states, evaluate_controller, mean_action_distance, SweepConfig};
use super::report::{Adjacency, BaselineMethod, BaselineReport, Finding};
use crate::data::{compute_norm_stats, Dataset, NormStats};
use crate::diffcore::{adam_update, mlp_mse_loss_and_grad, AdamState, Matrix, NetworkSpec, OutputActivation, ParamVector};
use crate::envs::Environment;
use crate::exec::Executor;
use crate::lion::{train_fixed_lambda, LionPolicy, LionTrainConfig};
use crate::models::{minibatches, BehaviorNet, DynamicsEnsemble};
use crate::rng::seeded;
use crate::{Error, Result};

fn check_ascending(values: &[f64], what: &str) -> Result<()> {
    if values.is_empty() || values.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidConfig(format!("{what} must be non-empty and strictly ascending")));
    }
    Ok(())
}

/// Squared Euclidean action change between consecutive controllers, averaged over `states`.
pub fn adjacency<F>(states: &[Vec<f64>], settings: usize, mut act: F) -> Result<Adjacency>
where
    F: FnMut(usize, &[f64]) -> Result<Vec<f64>>,
{
    let mut jumps = Vec::with_capacity(settings.saturating_sub(1));
    for i in 1..settings {
        let mut total = 0.0;
        for s in states {
            let a = act(i - 1, s)?;
            let b = act(i, s)?;
            total += a.iter().zip(&b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>();
        }
        jumps.push(total / states.len().max(1) as f64);
    }
    Ok(Adjacency::from_jumps(jumps))
}

/// One unconditioned policy per λ, each trained independently with the LION
/// loss at that fixed λ. Identical seeds across entries.
pub fn train_discrete_collection<X: Executor>(
    dataset: &Dataset,
    ensemble: &DynamicsEnsemble,
    behavior: &BehaviorNet,
    lambdas: &[f64],
    cfg: &LionTrainConfig,
    exec: &X,
) -> Result<Vec<LionPolicy>> {
    check_ascending(lambdas, "lambda list")?;
    exec.map(lambdas.to_vec(), |l| {
        train_fixed_lambda(dataset, ensemble, behavior, l, cfg, exec).map(|t| t.policy)
    })
    .into_iter()
    .collect()
}

/// Returns, behavior distances and adjacency jumps of a discrete collection,
/// compared with the λ-conditioned policy on the same grid.
pub fn discrete_collection_report<E: Environment>(
    env: &E,
    dataset: &Dataset,
    behavior: &BehaviorNet,
    lion: &LionPolicy,
    lambdas: &[f64],
    policies: &[LionPolicy],
    sweep: &SweepConfig,
) -> Result<BaselineReport> {
    check_ascending(lambdas, "lambda list")?;
    if policies.len() != lambdas.len() {
        return Err(Error::InvalidConfig("one policy per lambda required".into()));
    }
    let states = distance_states(dataset, sweep.distance_states, sweep.seed);
    let mut report = empty_report(BaselineMethod::Discrete, lambdas.to_vec());
    for (p, &l) in policies.iter().zip(lambdas) {
        let e = evaluate_controller(env, |s| p.act(s, l), sweep.episodes, sweep.seed)?;
        report.mean_return.push(e.mean_return);
        report.return_stderr.push(e.stderr);
        report
            .behavior_distance
            .push(mean_action_distance(&states, |s| p.act(s, l), |s| Ok(behavior.act(s)))?);
    }
    report.adjacency = adjacency(&states, policies.len(), |i, s| policies[i].act(s, lambdas[i]))?;
    let reference = adjacency(&states, lambdas.len(), |i, s| lion.act(s, lambdas[i]))?;
    if lambdas.len() > 1 {
        report.findings.push(Finding::new(
            "discrete_collection_jumps",
            "independently trained fixed-lambda policies change more between neighbouring settings than the conditioned policy",
            report.adjacency.mean >= reference.mean,
            format!("mean J discrete {:.5}, conditioned {:.5}", report.adjacency.mean, reference.mean),
        ));
    }
    report.reference_adjacency = Some(reference);
    Ok(report)
}

pub(crate) fn empty_report(method: BaselineMethod, settings: Vec<f64>) -> BaselineReport {
    BaselineReport {
        method,
        settings,
        mean_return: Vec::new(),
        return_stderr: Vec::new(),
        behavior_distance: Vec::new(),
        adjacency: Adjacency::from_jumps(Vec::new()),
        reference_adjacency: None,
        findings: Vec::new(),
        error: None,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RvsConfig {
    pub hidden: Vec<usize>,
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub lr_decay: f64,
    pub seed: u64,
}

impl Default for RvsConfig {
    fn default() -> Self {
        Self {
            hidden: vec![64, 64],
            epochs: 300,
            batch_size: 64,
            learning_rate: 1e-3,
            lr_decay: 0.99,
            seed: 0,
        }
    }
}

/// Supervised policy π(s, R̂) conditioned on the min-max normalized return-to-go.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RvsPolicy {
    pub spec: NetworkSpec,
    pub params: ParamVector,
    pub norm: NormStats,
    pub rtg_min: f64,
    pub rtg_max: f64,
}

impl RvsPolicy {
    /// Maps a raw return-to-go into `[0, 1]` by the dataset range; 0.5 when the range is degenerate.
    pub fn condition_value(&self, rtg: f64) -> f64 {
        normalize_rtg(rtg, self.rtg_min, self.rtg_max)
    }

    /// Action for `state` at normalized conditioning value `c`.
    pub fn act(&self, state: &[f64], c: f64) -> Result<Vec<f64>> {
        let mut input = self.norm.normalize(state);
        input.push(if self.rtg_max > self.rtg_min { c } else { 0.5 });
        Ok(self.spec.forward(&self.params, &input, None)?.0)
    }
}

fn normalize_rtg(rtg: f64, min: f64, max: f64) -> f64 {
    if max > min {
        (rtg - min) / (max - min)
    } else {
        0.5
    }
}

/// Regresses dataset actions on (state, normalized return-to-go).
pub fn train_return_conditioned(dataset: &Dataset, cfg: &RvsConfig) -> Result<RvsPolicy> {
    let norm = compute_norm_stats(dataset)?;
    let rtgs: Vec<f64> = dataset.trajectories.iter().flat_map(|t| t.returns_to_go()).collect();
    let rtg_min = rtgs.iter().cloned().fold(f64::INFINITY, f64::min);
    let rtg_max = rtgs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let inputs: Vec<Vec<f64>> = dataset
        .transitions()
        .zip(&rtgs)
        .map(|(t, &g)| {
            let mut z = norm.normalize(&t.state);
            z.push(normalize_rtg(g, rtg_min, rtg_max));
            z
        })
        .collect();
    let actions: Vec<Vec<f64>> = dataset.transitions().map(|t| t.action.clone()).collect();
    let spec = NetworkSpec::mlp(dataset.state_dim + 1, &cfg.hidden, dataset.action_dim, OutputActivation::Tanh);
    spec.validate()?;
    let mut rng = seeded(cfg.seed);
    let mut params = spec.init(&mut rng);
    let mut adam = AdamState::new(params.len(), cfg.learning_rate, cfg.lr_decay);
    for epoch in 0..cfg.epochs {
        for batch in minibatches(inputs.len(), cfg.batch_size, &mut rng) {
            let x = Matrix::from_rows(&batch.iter().map(|&i| &inputs[i][..]).collect::<Vec<_>>());
            let y = Matrix::from_rows(&batch.iter().map(|&i| &actions[i][..]).collect::<Vec<_>>());
            let (loss, grad) = mlp_mse_loss_and_grad(&spec, &params, &x, &y)?;
            if !loss.is_finite() {
                return Err(Error::Divergence { epoch, loss });
            }
            adam_update(&mut params, &grad, &mut adam).map_err(|_| Error::Divergence { epoch, loss })?;
        }
        adam.end_epoch();
    }
    Ok(RvsPolicy {
        spec,
        params,
        norm,
        rtg_min,
        rtg_max,
    })
}

/// Largest per-state spread of actions across the conditioning grid, averaged over states.
pub fn conditioning_variation(policy: &RvsPolicy, states: &[Vec<f64>], grid: &[f64]) -> Result<f64> {
    if states.is_empty() || grid.is_empty() {
        return Ok(0.0);
    }
    let mut total = 0.0;
    for s in states {
        let acts = grid.iter().map(|&c| policy.act(s, c)).collect::<Result<Vec<_>>>()?;
        let mut spread: f64 = 0.0;
        for d in 0..policy.spec.output_dim {
            let lo = acts.iter().map(|a| a[d]).fold(f64::INFINITY, f64::min);
            let hi = acts.iter().map(|a| a[d]).fold(f64::NEG_INFINITY, f64::max);
            spread = spread.max(hi - lo);
        }
        total += spread;
    }
    Ok(total / states.len() as f64)
}

/// Sweeps the conditioning value over `grid` (normalized returns, ascending).
pub fn return_conditioned_report<E: Environment>(
    env: &E,
    dataset: &Dataset,
    behavior: &BehaviorNet,
    policy: &RvsPolicy,
    grid: &[f64],
    sweep: &SweepConfig,
) -> Result<BaselineReport> {
    check_ascending(grid, "conditioning grid")?;
    let states = distance_states(dataset, sweep.distance_states, sweep.seed);
    let mut report = empty_report(BaselineMethod::ReturnCond, grid.to_vec());
    for &c in grid {
        let e = evaluate_controller(env, |s| policy.act(s, c), sweep.episodes, sweep.seed)?;
        report.mean_return.push(e.mean_return);
        report.return_stderr.push(e.stderr);
        report
            .behavior_distance
            .push(mean_action_distance(&states, |s| policy.act(s, c), |s| Ok(behavior.act(s)))?);
    }
    report.adjacency = adjacency(&states, grid.len(), |i, s| policy.act(s, grid[i]))?;
    let variation = conditioning_variation(policy, &states, grid)?;
    let returns: Vec<f64> = dataset.trajectories.iter().map(|t| t.returns_to_go().first().copied().unwrap_or(0.0)).collect();
    let (mean, stderr) = super::eval::mean_stderr(&returns);
    let spread = report.mean_return.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        - report.mean_return.iter().cloned().fold(f64::INFINITY, f64::min);
    report.findings.push(Finding::new(
        "return_conditioning_inert",
        "the conditioned policy learns few distinct behaviors across the return range",
        variation < 0.1,
        format!(
            "mean action spread {:.4} over the grid; env return spread {:.4}; dataset episode return {:.4} (std {:.4})",
            variation,
            spread,
            mean,
            stderr * crate::math::sqrt(returns.len() as f64)
        ),
    ));
    Ok(report)
}
