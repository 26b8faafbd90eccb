use alloc::string::String;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use super::eval::{evaluate_policy, LambdaSweepResult};
use crate::envs::Environment;
use crate::lion::LionPolicy;
use crate::math;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    /// The next λ did not beat the best return so far (or the baseline).
    PerformanceDrop,
    /// λ = 1 was reached without a drop.
    ReachedEnd,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StrategyResult {
    pub visited: Vec<f64>,
    pub returns: Vec<f64>,
    pub final_lambda: f64,
    pub final_return: f64,
    pub stop_reason: StopReason,
    pub baseline_return: f64,
}

impl StrategyResult {
    pub fn describe(&self) -> String {
        alloc::format!(
            "final lambda {:.2} return {:.4} after {} steps ({:?})",
            self.final_lambda,
            self.final_return,
            self.visited.len(),
            self.stop_reason
        )
    }
}

/// The stepwise operator rule: start at λ = 0 and keep increasing by `step`
/// while each new return strictly exceeds both the best return so far and
/// `baseline_return`. The first value that fails is measured (and recorded)
/// but the operator reverts to the previous λ.
pub fn user_strategy<F>(step: f64, baseline_return: f64, mut measure: F) -> Result<StrategyResult>
where
    F: FnMut(f64) -> Result<f64>,
{
    if !(step > 0.0) || step > 1.0 {
        return Err(Error::InvalidConfig("strategy step must lie in (0, 1]".into()));
    }
    let mut visited = Vec::new();
    let mut returns = Vec::new();
    let first = measure(0.0)?;
    visited.push(0.0);
    returns.push(first);
    let (mut final_lambda, mut final_return) = (0.0, first);
    let mut i = 1usize;
    loop {
        let lambda = (i as f64 * step).min(1.0);
        let lambda = math::round(lambda * 1e12) / 1e12;
        if final_lambda >= 1.0 {
            return Ok(StrategyResult {
                visited,
                returns,
                final_lambda,
                final_return,
                stop_reason: StopReason::ReachedEnd,
                baseline_return,
            });
        }
        let r = measure(lambda)?;
        visited.push(lambda);
        returns.push(r);
        if !(r > final_return.max(baseline_return)) {
            return Ok(StrategyResult {
                visited,
                returns,
                final_lambda,
                final_return,
                stop_reason: StopReason::PerformanceDrop,
                baseline_return,
            });
        }
        final_lambda = lambda;
        final_return = r;
        i += 1;
    }
}

/// Applies [`user_strategy`] to returns already measured in a sweep whose grid
/// contains every multiple of `step`.
pub fn user_strategy_on_sweep(sweep: &LambdaSweepResult, step: f64, baseline_return: f64) -> Result<StrategyResult> {
    user_strategy(step, baseline_return, |l| {
        sweep
            .at(l)
            .map(|i| sweep.mean_return[i])
            .ok_or_else(|| Error::InvalidConfig(alloc::format!("sweep grid lacks lambda {l}")))
    })
}

/// Applies [`user_strategy`] with live paired evaluations in the true environment.
pub fn user_strategy_env<E: Environment>(
    env: &E,
    policy: &LionPolicy,
    step: f64,
    baseline_return: f64,
    episodes: usize,
    seed: u64,
) -> Result<StrategyResult> {
    user_strategy(step, baseline_return, |l| Ok(evaluate_policy(env, policy, l, episodes, seed)?.mean_return))
}
