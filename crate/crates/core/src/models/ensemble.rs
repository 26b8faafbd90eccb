use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use super::dynamics::{taped_member_step, DynamicsMember};
use crate::data::NormStats;
use crate::diffcore::{BoundNet, Matrix, Tape, Var};
use crate::math;
use crate::rng::{index, Rng};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Aggregation {
    /// Lowest predicted reward and the successor state of that member.
    Min,
    /// Mean reward; successor state of a uniformly drawn member.
    Mean,
    /// Member 0 only.
    Single,
}

impl Aggregation {
    pub const ALL: [Aggregation; 3] = [Aggregation::Min, Aggregation::Mean, Aggregation::Single];

    pub fn name(self) -> &'static str {
        match self {
            Aggregation::Min => "min",
            Aggregation::Mean => "mean",
            Aggregation::Single => "single",
        }
    }
}

impl core::str::FromStr for Aggregation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "min" => Ok(Aggregation::Min),
            "mean" => Ok(Aggregation::Mean),
            "single" => Ok(Aggregation::Single),
            other => Err(Error::InvalidConfig(alloc::format!("unknown aggregation '{other}'"))),
        }
    }
}

/// Combines member rewards into `(reward, member providing the next state)`.
/// `rng` is only consumed in [`Aggregation::Mean`].
pub fn aggregate(rewards: &[f64], mode: Aggregation, rng: &mut Rng) -> (f64, usize) {
    match mode {
        Aggregation::Min => {
            let mut best = 0;
            for (i, &r) in rewards.iter().enumerate().skip(1) {
                if r < rewards[best] {
                    best = i;
                }
            }
            (rewards[best], best)
        }
        Aggregation::Mean => (math::pairwise_sum(rewards) / rewards.len() as f64, index(rng, rewards.len())),
        Aggregation::Single => (rewards[0], 0),
    }
}

/// Frozen dynamics ensemble operating in normalized state space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DynamicsEnsemble {
    pub members: Vec<DynamicsMember>,
    pub mode: Aggregation,
    pub norm: NormStats,
    pub action_dim: usize,
    /// Warm-up steps for recurrent members (0 for feedforward ensembles).
    pub history_len: usize,
    /// Training prediction window of recurrent members.
    pub pred_window: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    /// Raw-unit reward after aggregation.
    pub reward: f64,
    /// Raw-unit next state.
    pub next_state: Vec<f64>,
    pub member: usize,
}

/// Per-member hidden states of a recurrent ensemble.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct EnsembleContext {
    hidden: Vec<Option<Vec<f64>>>,
}

impl DynamicsEnsemble {
    pub fn new(members: Vec<DynamicsMember>, mode: Aggregation, norm: NormStats, action_dim: usize) -> Result<Self> {
        let first = members.first().ok_or_else(|| Error::InvalidConfig("ensemble needs at least one member".into()))?;
        let (din, dout, rec) = (first.spec.input_dim, first.spec.output_dim, first.is_recurrent());
        if din != norm.state_dim() + action_dim || dout != norm.state_dim() + 1 {
            return Err(Error::DimensionMismatch {
                layer: "ensemble member 0".into(),
                expected: norm.state_dim() + action_dim,
                found: din,
            });
        }
        for (i, m) in members.iter().enumerate() {
            if m.spec.input_dim != din || m.spec.output_dim != dout || m.is_recurrent() != rec {
                return Err(Error::DimensionMismatch {
                    layer: alloc::format!("ensemble member {i}"),
                    expected: din,
                    found: m.spec.input_dim,
                });
            }
        }
        Ok(Self {
            members,
            mode,
            norm,
            action_dim,
            history_len: 0,
            pred_window: 0,
        })
    }

    pub fn with_recurrence(mut self, history_len: usize, pred_window: usize) -> Self {
        self.history_len = history_len;
        self.pred_window = pred_window;
        self
    }

    pub fn with_mode(mut self, mode: Aggregation) -> Self {
        self.mode = mode;
        self
    }

    pub fn state_dim(&self) -> usize {
        self.norm.state_dim()
    }

    pub fn is_recurrent(&self) -> bool {
        self.members[0].is_recurrent()
    }

    /// Members taking part in the current mode.
    pub fn active_members(&self) -> &[DynamicsMember] {
        match self.mode {
            Aggregation::Single => &self.members[..1],
            _ => &self.members,
        }
    }

    pub fn context(&self) -> EnsembleContext {
        EnsembleContext {
            hidden: self.active_members().iter().map(DynamicsMember::initial_hidden).collect(),
        }
    }

    /// Feeds observed raw `(state, action)` pairs through every recurrent member.
    pub fn warm_up(&self, ctx: &mut EnsembleContext, history: &[(Vec<f64>, Vec<f64>)]) -> Result<()> {
        if !self.is_recurrent() {
            return Ok(());
        }
        for (s, a) in history {
            let z = self.norm.normalize(s);
            for (m, h) in self.active_members().iter().zip(&mut ctx.hidden) {
                *h = m.predict(&z, a, h.as_deref())?.2;
            }
        }
        Ok(())
    }

    /// Raw-unit `(reward, next_state)` of every active member; advances hidden states.
    pub fn member_predictions(&self, ctx: &mut EnsembleContext, state: &[f64], action: &[f64]) -> Result<Vec<(f64, Vec<f64>)>> {
        let z = self.norm.normalize(state);
        self.active_members()
            .iter()
            .zip(&mut ctx.hidden)
            .map(|(m, h)| {
                let (next, r, h2) = m.predict(&z, action, h.as_deref())?;
                *h = h2;
                Ok((self.norm.reward_from_unit(r), self.norm.denormalize(&next)))
            })
            .collect()
    }

    /// Aggregated one-step prediction from raw `state` and `action`.
    pub fn predict(&self, ctx: &mut EnsembleContext, state: &[f64], action: &[f64], rng: &mut Rng) -> Result<Prediction> {
        let preds = self.member_predictions(ctx, state, action)?;
        let rewards: Vec<f64> = preds.iter().map(|p| p.0).collect();
        let (reward, member) = aggregate(&rewards, self.mode, rng);
        Ok(Prediction {
            reward,
            next_state: preds[member].1.clone(),
            member,
        })
    }

    /// Binds every active member as frozen constants on `tape`.
    pub fn bind(&self, tape: &mut Tape) -> Result<BoundEnsemble> {
        let nets = self
            .active_members()
            .iter()
            .map(|m| m.spec.bind(tape, &m.params, false))
            .collect::<Result<Vec<_>>>()?;
        Ok(BoundEnsemble {
            nets,
            mode: self.mode,
            cells: self.active_members().iter().map(|m| m.spec.cell_size()).collect(),
        })
    }
}

/// Batched ensemble on a tape; states are normalized and rewards unit-scaled.
pub struct BoundEnsemble {
    nets: Vec<BoundNet>,
    mode: Aggregation,
    cells: Vec<Option<usize>>,
}

pub struct TapedPrediction {
    /// `batch × 1` unit-scaled aggregated reward.
    pub reward: Var,
    /// `batch × state_dim` normalized successor state.
    pub next_state: Var,
    pub choice: Vec<usize>,
}

impl BoundEnsemble {
    pub fn len(&self) -> usize {
        self.nets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nets.is_empty()
    }

    /// Fresh zero hidden states for a batch.
    pub fn initial_hidden(&self, tape: &mut Tape, batch: usize) -> Vec<Option<Var>> {
        self.cells.iter().map(|c| c.map(|c| tape.constant(Matrix::zeros(batch, c)))).collect()
    }

    /// Advances the hidden states on observed inputs without producing predictions.
    pub fn warm_up_step(&self, tape: &mut Tape, state: Var, action: Var, hidden: &mut [Option<Var>]) -> Result<()> {
        for (net, h) in self.nets.iter().zip(hidden.iter_mut()) {
            if h.is_some() {
                *h = taped_member_step(net, tape, state, action, *h)?.2;
            }
        }
        Ok(())
    }

    /// One aggregated step. Row selection is made on values; gradients flow
    /// through the selected members' outputs.
    pub fn step(&self, tape: &mut Tape, state: Var, action: Var, hidden: &mut [Option<Var>], rng: &mut Rng) -> Result<TapedPrediction> {
        let mut nexts = Vec::with_capacity(self.nets.len());
        let mut rewards = Vec::with_capacity(self.nets.len());
        for (net, h) in self.nets.iter().zip(hidden.iter_mut()) {
            let (next, r, h2) = taped_member_step(net, tape, state, action, *h)?;
            *h = h2;
            nexts.push(next);
            rewards.push(r);
        }
        let batch = tape.shape(state).0;
        let mut choice = Vec::with_capacity(batch);
        let mut row_rewards = Vec::with_capacity(self.nets.len());
        for row in 0..batch {
            row_rewards.clear();
            row_rewards.extend(rewards.iter().map(|&r| tape.value(r).data()[row]));
            choice.push(aggregate(&row_rewards, self.mode, rng).1);
        }
        let reward = match self.mode {
            Aggregation::Mean => {
                let sum = pairwise_add(tape, &rewards);
                tape.scale(sum, 1.0 / rewards.len() as f64)
            }
            _ => tape.select_rows(&rewards, &choice),
        };
        let next_state = tape.select_rows(&nexts, &choice);
        Ok(TapedPrediction {
            reward,
            next_state,
            choice,
        })
    }
}

fn pairwise_add(tape: &mut Tape, vars: &[Var]) -> Var {
    match vars.len() {
        1 => vars[0],
        n => {
            let (lo, hi) = vars.split_at(n / 2);
            let a = pairwise_add(tape, lo);
            let b = pairwise_add(tape, hi);
            tape.add(a, b)
        }
    }
}
