use alloc::vec;
use alloc::vec::Vec;
use rand::RngCore;
use serde::{Deserialize, Serialize};

use super::policy::{Conditioning, LionPolicy};
use super::rollout::{sample_starts, AnchorBatch, Objective, ObjectiveJob};
use super::sampler::LambdaSampler;
use crate::data::Dataset;
use crate::diffcore::{adam_update, AdamState};
use crate::exec::{chunk_ranges, Executor, Serial};
use crate::models::{BehaviorNet, DynamicsEnsemble};
use crate::rng::{derive_seed, seeded, Rng};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LionTrainConfig {
    pub gamma: f64,
    pub horizon: usize,
    pub eta: f64,
    pub beta_a: f64,
    pub beta_b: f64,
    /// Number of Adam updates U.
    pub updates: usize,
    /// Rollout start states per update.
    pub batch: usize,
    /// Dataset transitions per update for the anchor term.
    pub anchor_batch: usize,
    pub hidden: Vec<usize>,
    pub learning_rate: f64,
    pub lr_decay: f64,
    /// Updates per learning-rate decay step.
    pub decay_every: usize,
    /// Contiguous parts each update's rollouts are split into (one tape each).
    /// Part of the configuration so results never depend on thread count.
    pub rollout_chunks: usize,
    pub seed: u64,
}

impl Default for LionTrainConfig {
    fn default() -> Self {
        Self {
            gamma: 0.97,
            horizon: 30,
            eta: 0.1,
            beta_a: 0.1,
            beta_b: 0.1,
            updates: 3000,
            batch: 64,
            anchor_batch: 64,
            hidden: vec![64, 64],
            learning_rate: 1e-3,
            lr_decay: 0.99,
            decay_every: 50,
            rollout_chunks: 4,
            seed: 0,
        }
    }
}

impl LionTrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.into()));
        if !(0.0..1.0).contains(&self.gamma) {
            return bad("gamma must be in [0, 1)");
        }
        if self.horizon == 0 {
            return bad("horizon must be at least 1");
        }
        if !(self.eta >= 0.0) {
            return bad("eta must be non-negative");
        }
        if self.batch == 0 || self.decay_every == 0 || self.rollout_chunks == 0 {
            return bad("batch, decay_every and rollout_chunks must be positive");
        }
        if !(self.learning_rate > 0.0) || !(self.lr_decay > 0.0 && self.lr_decay <= 1.0) {
            return bad("learning_rate must be positive and lr_decay in (0, 1]");
        }
        self.sampler().validate()
    }

    pub fn sampler(&self) -> LambdaSampler {
        LambdaSampler {
            a: self.beta_a,
            b: self.beta_b,
        }
    }
}

/// One line of the training log.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainRecord {
    pub update: usize,
    pub loss: f64,
    pub rollout_loss: f64,
    pub anchor_loss: f64,
    pub lambda_mean: f64,
}

#[derive(Clone, Debug)]
pub struct LionTraining {
    pub policy: LionPolicy,
    pub log: Vec<TrainRecord>,
}

/// Splits the rollouts of an update into `chunks` contiguous parts, each on its
/// own tape with a seed drawn from the rollout stream, and sums the parts in
/// order. Results depend on `chunks` but not on how the executor schedules them.
#[derive(Clone, Copy, Debug)]
pub struct ChunkedEngine<'e, E> {
    pub exec: &'e E,
    pub chunks: usize,
}

impl<'e, E: Executor> ChunkedEngine<'e, E> {
    pub fn new(exec: &'e E, chunks: usize) -> Self {
        Self { exec, chunks }
    }
}

impl<E: Executor> ChunkedEngine<'_, E> {
    pub fn evaluate(&self, job: &ObjectiveJob<'_>, rng: &mut Rng) -> Result<Objective> {
        let ranges = chunk_ranges(job.starts.len(), self.chunks);
        let items: Vec<_> = ranges.into_iter().enumerate().map(|(i, r)| (i, r, rng.next_u64())).collect();
        let parts = self
            .exec
            .map(items, |(i, range, seed)| job.part(range, i == 0, &mut seeded(seed)))
            .into_iter()
            .collect::<Result<Vec<_>>>()?;
        Objective::merge(parts).ok_or(Error::EmptyDataset)
    }
}

enum LambdaSource {
    Sampled(LambdaSampler),
    Fixed(f64),
}

/// Trains a λ-conditioned policy against a frozen ensemble and behavior clone.
pub fn train_lion(
    dataset: &Dataset,
    ensemble: &DynamicsEnsemble,
    behavior: &BehaviorNet,
    cfg: &LionTrainConfig,
) -> Result<LionTraining> {
    train_lion_observed(dataset, ensemble, behavior, cfg, &Serial, |_, _| {})
}

/// As [`train_lion`], running rollout chunks on `exec` and calling `observer` after every update.
pub fn train_lion_observed<X, F>(
    dataset: &Dataset,
    ensemble: &DynamicsEnsemble,
    behavior: &BehaviorNet,
    cfg: &LionTrainConfig,
    exec: &X,
    observer: F,
) -> Result<LionTraining>
where
    X: Executor,
    F: FnMut(&TrainRecord, &LionPolicy),
{
    cfg.validate()?;
    train_with(dataset, ensemble, behavior, cfg, LambdaSource::Sampled(cfg.sampler()), exec, observer)
}

/// Trains an unconditioned policy for a single λ with the same loss; the anchor
/// term is weighted by `(1 − λ)·η`.
pub fn train_fixed_lambda<X: Executor>(
    dataset: &Dataset,
    ensemble: &DynamicsEnsemble,
    behavior: &BehaviorNet,
    lambda: f64,
    cfg: &LionTrainConfig,
    exec: &X,
) -> Result<LionTraining> {
    cfg.validate()?;
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::LambdaOutOfRange(lambda));
    }
    train_with(dataset, ensemble, behavior, cfg, LambdaSource::Fixed(lambda), exec, |_, _| {})
}

fn train_with<X, F>(
    dataset: &Dataset,
    ensemble: &DynamicsEnsemble,
    behavior: &BehaviorNet,
    cfg: &LionTrainConfig,
    source: LambdaSource,
    exec: &X,
    mut observer: F,
) -> Result<LionTraining>
where
    X: Executor,
    F: FnMut(&TrainRecord, &LionPolicy),
{
    let engine = ChunkedEngine::new(exec, cfg.rollout_chunks);
    if dataset.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if ensemble.state_dim() != dataset.state_dim || ensemble.action_dim != dataset.action_dim {
        return Err(Error::DimensionMismatch {
            layer: "ensemble".into(),
            expected: dataset.state_dim,
            found: ensemble.state_dim(),
        });
    }
    if behavior.spec.output_dim != dataset.action_dim || behavior.spec.input_dim != dataset.state_dim {
        return Err(Error::DimensionMismatch {
            layer: "behavior".into(),
            expected: dataset.action_dim,
            found: behavior.spec.output_dim,
        });
    }
    let conditioning = match source {
        LambdaSource::Sampled(_) => Conditioning::Input,
        LambdaSource::Fixed(l) => Conditioning::Fixed(l),
    };
    let mut init_rng = seeded(derive_seed(cfg.seed, 1));
    let mut start_rng = seeded(derive_seed(cfg.seed, 2));
    let mut lambda_rng = seeded(derive_seed(cfg.seed, 3));
    let mut rollout_rng = seeded(derive_seed(cfg.seed, 4));
    let mut policy = LionPolicy::init(&ensemble.norm, dataset.action_dim, &cfg.hidden, conditioning, &mut init_rng);
    let mut adam = AdamState::new(policy.params.len(), cfg.learning_rate, cfg.lr_decay);
    let anchor_weight = match source {
        LambdaSource::Sampled(_) => cfg.eta,
        LambdaSource::Fixed(l) => (1.0 - l) * cfg.eta,
    };
    let mut log = Vec::with_capacity(cfg.updates);
    for update in 0..cfg.updates {
        let starts = sample_starts(dataset, cfg.batch, ensemble.history_len, &mut start_rng)?;
        let lambdas: Vec<f64> = match &source {
            LambdaSource::Sampled(s) => (0..cfg.batch).map(|_| s.sample(&mut lambda_rng)).collect(),
            LambdaSource::Fixed(l) => vec![*l; cfg.batch],
        };
        let anchor = AnchorBatch::sample(dataset, cfg.anchor_batch, &mut start_rng)?;
        let job = ObjectiveJob {
            policy: &policy,
            ensemble,
            behavior,
            starts: &starts,
            lambdas: &lambdas,
            anchor: &anchor,
            anchor_weight,
            cfg,
        };
        let obj = engine.evaluate(&job, &mut rollout_rng)?;
        if !obj.value.is_finite() {
            return Err(Error::Divergence {
                epoch: update,
                loss: obj.value,
            });
        }
        adam_update(&mut policy.params, &obj.grad, &mut adam).map_err(|_| Error::Divergence {
            epoch: update,
            loss: obj.value,
        })?;
        if (update + 1) % cfg.decay_every == 0 {
            adam.end_epoch();
        }
        let record = TrainRecord {
            update,
            loss: obj.value,
            rollout_loss: obj.rollout_loss,
            anchor_loss: obj.anchor_loss,
            lambda_mean: lambdas.iter().sum::<f64>() / lambdas.len() as f64,
        };
        observer(&record, &policy);
        log.push(record);
    }
    Ok(LionTraining { policy, log })
}
