use alloc::vec::Vec;
use rand::seq::index::sample;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::envs::Environment;
use crate::lion::{compute_penalty, LionPolicy};
use crate::math;
use crate::models::BehaviorNet;
use crate::rng::seeded;
use crate::{Error, Result};

/// Monte-Carlo summary of full-length episodes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub mean_return: f64,
    pub stderr: f64,
    pub returns: Vec<f64>,
    /// Observation after the last step of each episode.
    pub final_observations: Vec<Vec<f64>>,
}

/// Sample mean and standard error (n − 1 convention; 0 for a single value).
pub fn mean_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64;
    (mean, math::sqrt(var / n as f64))
}

/// Undiscounted returns of `episodes` rollouts of `policy`. Start states are
/// drawn from `seed` alone, so any two policies see the same starts.
pub fn evaluate_controller<E, P>(env: &E, mut policy: P, episodes: usize, seed: u64) -> Result<Evaluation>
where
    E: Environment,
    P: FnMut(&[f64]) -> Result<Vec<f64>>,
{
    if episodes == 0 {
        return Err(Error::InvalidConfig("episodes must be at least 1".into()));
    }
    let mut rng = seeded(seed);
    let mut returns = Vec::with_capacity(episodes);
    let mut finals = Vec::with_capacity(episodes);
    for _ in 0..episodes {
        let mut state = env.sample_start(&mut rng);
        let mut total = 0.0;
        for _ in 0..env.episode_length() {
            let action = policy(&env.observe(&state))?;
            let (next, r) = env.step(&state, &action);
            total += r;
            state = next;
        }
        returns.push(total);
        finals.push(env.observe(&state));
    }
    let (mean_return, stderr) = mean_stderr(&returns);
    Ok(Evaluation {
        mean_return,
        stderr,
        returns,
        final_observations: finals,
    })
}

/// [`evaluate_controller`] for `policy` at a fixed λ.
pub fn evaluate_policy<E: Environment>(env: &E, policy: &LionPolicy, lambda: f64, episodes: usize, seed: u64) -> Result<Evaluation> {
    evaluate_controller(env, |s| policy.act(s, lambda), episodes, seed)
}

/// Up to `max` dataset states, subsampled without replacement when needed.
pub fn distance_states(dataset: &Dataset, max: usize, seed: u64) -> Vec<Vec<f64>> {
    let all = dataset.states();
    if all.len() <= max {
        return all;
    }
    let mut idx = sample(&mut seeded(seed), all.len(), max).into_vec();
    idx.sort_unstable();
    idx.into_iter().map(|i| all[i].clone()).collect()
}

/// Mean over states and action dimensions of the squared difference between
/// two controllers.
pub fn mean_action_distance<A, B>(states: &[Vec<f64>], mut a: A, mut b: B) -> Result<f64>
where
    A: FnMut(&[f64]) -> Result<Vec<f64>>,
    B: FnMut(&[f64]) -> Result<Vec<f64>>,
{
    if states.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut total = 0.0;
    for s in states {
        total += compute_penalty(&b(s)?, &a(s)?);
    }
    Ok(total / states.len() as f64)
}

/// Squared action distance between π(·, λ) and the behavior clone.
pub fn behavior_distance(policy: &LionPolicy, behavior: &BehaviorNet, lambda: f64, states: &[Vec<f64>]) -> Result<f64> {
    mean_action_distance(states, |s| policy.act(s, lambda), |s| Ok(behavior.act(s)))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub grid: Vec<f64>,
    pub episodes: usize,
    pub seed: u64,
    pub distance_states: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            grid: lambda_grid(0.05),
            episodes: 50,
            seed: 1000,
            distance_states: 1000,
        }
    }
}

/// `0, step, 2·step, …, 1` with the endpoint included exactly.
pub fn lambda_grid(step: f64) -> Vec<f64> {
    let n = math::round(1.0 / step) as usize;
    (0..=n).map(|i| (i as f64 * step).min(1.0)).map(|l| math::round(l * 1e12) / 1e12).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LambdaSweepResult {
    pub grid: Vec<f64>,
    pub mean_return: Vec<f64>,
    pub return_stderr: Vec<f64>,
    pub mean_distance: Vec<f64>,
    pub episodes: usize,
    /// Final observation of every evaluation episode, per grid value.
    pub final_observations: Vec<Vec<Vec<f64>>>,
}

impl LambdaSweepResult {
    /// Grid value with the highest mean return (first on ties).
    pub fn argmax_return(&self) -> f64 {
        let mut best = 0;
        for i in 1..self.grid.len() {
            if self.mean_return[i] > self.mean_return[best] {
                best = i;
            }
        }
        self.grid[best]
    }

    pub fn at(&self, lambda: f64) -> Option<usize> {
        self.grid.iter().position(|&l| (l - lambda).abs() < 1e-9)
    }
}

/// Per-λ paired-evaluation returns and behavior distances.
pub fn lambda_sweep<E: Environment>(
    env: &E,
    policy: &LionPolicy,
    behavior: &BehaviorNet,
    dataset: &Dataset,
    cfg: &SweepConfig,
) -> Result<LambdaSweepResult> {
    let mut grid = cfg.grid.clone();
    if grid.is_empty() || grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidConfig("sweep grid must be non-empty and strictly ascending".into()));
    }
    if let Some(&bad) = grid.iter().find(|l| !(0.0..=1.0).contains(*l)) {
        return Err(Error::LambdaOutOfRange(bad));
    }
    let states = distance_states(dataset, cfg.distance_states, cfg.seed);
    let mut out = LambdaSweepResult {
        grid: Vec::new(),
        mean_return: Vec::new(),
        return_stderr: Vec::new(),
        mean_distance: Vec::new(),
        episodes: cfg.episodes,
        final_observations: Vec::new(),
    };
    for &l in &grid {
        let e = evaluate_policy(env, policy, l, cfg.episodes, cfg.seed)?;
        out.mean_return.push(e.mean_return);
        out.return_stderr.push(e.stderr);
        out.final_observations.push(e.final_observations);
        out.mean_distance.push(behavior_distance(policy, behavior, l, &states)?);
    }
    out.grid = core::mem::take(&mut grid);
    Ok(out)
}
