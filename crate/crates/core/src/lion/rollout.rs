use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use super::policy::LionPolicy;
use super::train::LionTrainConfig;
use crate::data::{Dataset, NormStats};
use crate::diffcore::{mse, Matrix, Tape, Var};
use crate::models::{BehaviorNet, DynamicsEnsemble};
use crate::rng::{index, Rng};
use crate::{Error, Result};

/// Upper end of the normalized reward range; matches the largest possible penalty.
pub const REWARD_SCALE: f64 = 4.0;

/// Mean over action dimensions of the squared difference.
pub fn compute_penalty(behavior_action: &[f64], policy_action: &[f64]) -> f64 {
    assert_eq!(behavior_action.len(), policy_action.len(), "action dimensions differ");
    let sum: f64 = behavior_action
        .iter()
        .zip(policy_action)
        .map(|(b, a)| (b - a) * (b - a))
        .sum();
    sum / behavior_action.len() as f64
}

/// Maps `[reward_min, reward_max]` affinely onto `[0, REWARD_SCALE]`.
pub fn normalize_reward(r: f64, norm: &NormStats) -> Result<f64> {
    if !(norm.reward_max > norm.reward_min) {
        return Err(Error::DegenerateRewardRange {
            min: norm.reward_min,
            max: norm.reward_max,
        });
    }
    Ok(REWARD_SCALE * (r - norm.reward_min) / norm.reward_range())
}

/// A rollout start state plus the observed `(state, action)` history that
/// warms up recurrent ensemble members.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RolloutStart {
    pub state: Vec<f64>,
    pub history: Vec<(Vec<f64>, Vec<f64>)>,
}

impl RolloutStart {
    pub fn new(state: Vec<f64>) -> Self {
        Self {
            state,
            history: Vec::new(),
        }
    }
}

/// Uniform draws over dataset states that have at least `history_len` predecessors.
pub fn sample_starts(dataset: &Dataset, count: usize, history_len: usize, rng: &mut Rng) -> Result<Vec<RolloutStart>> {
    let eligible: Vec<(usize, usize)> = dataset
        .trajectories
        .iter()
        .enumerate()
        .flat_map(|(i, t)| (history_len..t.len()).map(move |k| (i, k)))
        .collect();
    if eligible.is_empty() {
        return Err(Error::EmptyDataset);
    }
    Ok((0..count)
        .map(|_| {
            let (i, k) = eligible[index(rng, eligible.len())];
            let ts = &dataset.trajectories[i].transitions;
            RolloutStart {
                state: ts[k].state.clone(),
                history: ts[k - history_len..k].iter().map(|t| (t.state.clone(), t.action.clone())).collect(),
            }
        })
        .collect())
}

/// Dataset transitions for the λ=0 anchor term.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct AnchorBatch {
    pub states: Vec<Vec<f64>>,
    pub actions: Vec<Vec<f64>>,
}

impl AnchorBatch {
    pub fn sample(dataset: &Dataset, count: usize, rng: &mut Rng) -> Result<Self> {
        let all: Vec<_> = dataset.transitions().collect();
        if all.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let mut batch = Self::default();
        for _ in 0..count {
            let t = all[index(rng, all.len())];
            batch.states.push(t.state.clone());
            batch.actions.push(t.action.clone());
        }
        Ok(batch)
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }
}

/// Mean squared difference between dataset actions and π(s, 0).
pub fn data_anchor_loss(policy: &LionPolicy, batch: &AnchorBatch) -> Result<f64> {
    if batch.is_empty() {
        return Ok(0.0);
    }
    let mut total = 0.0;
    for (s, a) in batch.states.iter().zip(&batch.actions) {
        total += compute_penalty(a, &policy.act(s, 0.0)?);
    }
    Ok(total / batch.len() as f64)
}

fn policy_input(tape: &mut Tape, policy: &LionPolicy, z: Var, lambdas: Var) -> Var {
    if policy.is_conditioned() {
        tape.concat(&[z, lambdas])
    } else {
        z
    }
}

#[allow(clippy::too_many_arguments)]
/// Builds `-Σ_rollouts Σ_t γᵗ [λ·e − (1−λ)·p]` on `tape`; returns the 1×1 loss.
fn taped_rollout(
    tape: &mut Tape,
    policy: &LionPolicy,
    policy_net: &crate::diffcore::BoundNet,
    ensemble: &DynamicsEnsemble,
    behavior: &BehaviorNet,
    starts: &[RolloutStart],
    lambdas: &[f64],
    cfg: &LionTrainConfig,
    rng: &mut Rng,
) -> Result<Var> {
    let batch = starts.len();
    if batch == 0 || lambdas.len() != batch {
        return Err(Error::InvalidConfig("one λ per rollout start is required".into()));
    }
    if let Some(&bad) = lambdas.iter().find(|l| !(0.0..=1.0).contains(*l)) {
        return Err(Error::LambdaOutOfRange(bad));
    }
    if ensemble.norm.reward_range() <= 0.0 {
        return Err(Error::DegenerateRewardRange {
            min: ensemble.norm.reward_min,
            max: ensemble.norm.reward_max,
        });
    }
    let bound = ensemble.bind(tape)?;
    let behavior_net = behavior.spec.bind(tape, &behavior.params, false)?;
    let mut hidden = bound.initial_hidden(tape, batch);
    if ensemble.is_recurrent() {
        for step in 0..ensemble.history_len {
            let rows: Vec<Vec<f64>> = starts
                .iter()
                .map(|s| s.history.get(step).map(|h| ensemble.norm.normalize(&h.0)))
                .collect::<Option<_>>()
                .ok_or_else(|| Error::InvalidConfig("rollout start lacks warm-up history".into()))?;
            let acts: Vec<&[f64]> = starts.iter().map(|s| &s.history[step].1[..]).collect();
            let sv = tape.constant(Matrix::from_rows(&rows));
            let av = tape.constant(Matrix::from_rows(&acts));
            bound.warm_up_step(tape, sv, av, &mut hidden)?;
        }
    }
    let to_behavior: (Vec<f64>, Vec<f64>) = (
        ensemble.norm.state_std.iter().zip(&behavior.norm.state_std).map(|(e, b)| e / b).collect(),
        ensemble
            .norm
            .state_mean
            .iter()
            .zip(&behavior.norm.state_mean)
            .zip(&behavior.norm.state_std)
            .map(|((me, mb), sb)| (me - mb) / sb)
            .collect(),
    );
    let rows: Vec<Vec<f64>> = starts.iter().map(|s| ensemble.norm.normalize(&s.state)).collect();
    let mut z = tape.constant(Matrix::from_rows(&rows));
    let lam = tape.constant(Matrix::column(lambdas));
    let keep = tape.constant(Matrix::column(&lambdas.iter().map(|l| 1.0 - l).collect::<Vec<_>>()));
    let mut acc: Option<Var> = None;
    let mut discount = 1.0;
    for step in 0..cfg.horizon {
        let input = policy_input(tape, policy, z, lam);
        let action = policy_net.forward(tape, input)?;
        let zb = tape.col_affine(z, &to_behavior.0, &to_behavior.1);
        let reference = behavior_net.forward(tape, zb)?;
        let reference = tape.clamp(reference, -1.0, 1.0);
        let diff = tape.sub(reference, action);
        let sq = tape.square(diff);
        let penalty = tape.row_mean(sq);
        let pred = bound.step(tape, z, action, &mut hidden, rng)?;
        if !tape.value(pred.reward).is_finite() || !tape.value(pred.next_state).is_finite() {
            return Err(Error::NonFiniteRollout { step });
        }
        let reward = tape.scale(pred.reward, REWARD_SCALE);
        let gain = tape.row_scale(reward, lam);
        let cost = tape.row_scale(penalty, keep);
        let term = tape.sub(gain, cost);
        let term = tape.scale(term, discount);
        acc = Some(match acc {
            Some(a) => tape.add(a, term),
            None => term,
        });
        discount *= cfg.gamma;
        z = pred.next_state;
    }
    let total = match acc {
        Some(a) => tape.sum(a),
        None => tape.constant(Matrix::zeros(1, 1)),
    };
    Ok(tape.scale(total, -1.0))
}

/// Rollout loss summed over rollouts (no gradient).
pub fn rollout_loss(
    policy: &LionPolicy,
    ensemble: &DynamicsEnsemble,
    behavior: &BehaviorNet,
    starts: &[RolloutStart],
    lambdas: &[f64],
    cfg: &LionTrainConfig,
    rng: &mut Rng,
) -> Result<f64> {
    let mut tape = Tape::new();
    let net = policy.spec.bind(&mut tape, &policy.params, false)?;
    let loss = taped_rollout(&mut tape, policy, &net, ensemble, behavior, starts, lambdas, cfg, rng)?;
    Ok(tape.scalar(loss))
}

/// Value and θ-gradient of `rollout_loss / batch + anchor_weight · anchor`.
#[derive(Clone, Debug, PartialEq)]
pub struct Objective {
    pub value: f64,
    pub rollout_loss: f64,
    pub anchor_loss: f64,
    pub grad: Vec<f64>,
}

impl Objective {
    /// Sums partial objectives in order.
    pub fn merge(parts: Vec<Objective>) -> Option<Objective> {
        let mut iter = parts.into_iter();
        let mut acc = iter.next()?;
        for p in iter {
            acc.value += p.value;
            acc.rollout_loss += p.rollout_loss;
            acc.anchor_loss += p.anchor_loss;
            acc.grad.iter_mut().zip(&p.grad).for_each(|(a, b)| *a += b);
        }
        Some(acc)
    }
}

/// Everything one objective evaluation needs.
#[derive(Clone, Copy)]
pub struct ObjectiveJob<'a> {
    pub policy: &'a LionPolicy,
    pub ensemble: &'a DynamicsEnsemble,
    pub behavior: &'a BehaviorNet,
    pub starts: &'a [RolloutStart],
    pub lambdas: &'a [f64],
    pub anchor: &'a AnchorBatch,
    pub anchor_weight: f64,
    pub cfg: &'a LionTrainConfig,
}

impl ObjectiveJob<'_> {
    /// Objective over the rollouts in `range`, scaled by the full batch size;
    /// the anchor term is included when `with_anchor` is set.
    pub fn part(&self, range: core::ops::Range<usize>, with_anchor: bool, rng: &mut Rng) -> Result<Objective> {
        let mut tape = Tape::new();
        let net = self.policy.spec.bind(&mut tape, &self.policy.params, true)?;
        let rollout = taped_rollout(
            &mut tape,
            self.policy,
            &net,
            self.ensemble,
            self.behavior,
            &self.starts[range.clone()],
            &self.lambdas[range],
            self.cfg,
            rng,
        )?;
        let mut total = tape.scale(rollout, 1.0 / self.starts.len() as f64);
        let mut anchor_value = 0.0;
        if with_anchor && !self.anchor.is_empty() {
            let anchor = self.anchor;
            let rows: Vec<Vec<f64>> = anchor.states.iter().map(|s| self.policy.norm.normalize(s)).collect();
            let z = tape.constant(Matrix::from_rows(&rows));
            let zeros = tape.constant(Matrix::zeros(anchor.len(), 1));
            let input = policy_input(&mut tape, self.policy, z, zeros);
            let out = net.forward(&mut tape, input)?;
            let target = tape.constant(Matrix::from_rows(&anchor.actions));
            let a = mse(&mut tape, out, target);
            anchor_value = tape.scalar(a);
            let weighted = tape.scale(a, self.anchor_weight);
            total = tape.add(total, weighted);
        }
        let grads = tape.backward(total)?;
        Ok(Objective {
            value: tape.scalar(total),
            rollout_loss: tape.scalar(rollout),
            anchor_loss: anchor_value,
            grad: net.gradient(&tape, &grads),
        })
    }

    /// Whole-batch objective on one tape.
    pub fn evaluate(&self, rng: &mut Rng) -> Result<Objective> {
        self.part(0..self.starts.len(), true, rng)
    }
}

#[allow(clippy::too_many_arguments)]
pub fn lion_objective(
    policy: &LionPolicy,
    ensemble: &DynamicsEnsemble,
    behavior: &BehaviorNet,
    starts: &[RolloutStart],
    lambdas: &[f64],
    anchor: &AnchorBatch,
    anchor_weight: f64,
    cfg: &LionTrainConfig,
    rng: &mut Rng,
) -> Result<Objective> {
    ObjectiveJob {
        policy,
        ensemble,
        behavior,
        starts,
        lambdas,
        anchor,
        anchor_weight,
        cfg,
    }
    .evaluate(rng)
}
