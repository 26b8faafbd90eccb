//! Dynamics members. A member maps normalized `(state, action)` to
//! `[Δstate (normalized), reward (unit-scaled)]`; reward is the last output.

use alloc::vec;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use super::minibatches;
use crate::data::{Dataset, NormStats};
use crate::diffcore::{adam_update, mse, AdamState, BoundNet, Matrix, NetworkSpec, OutputActivation, ParamVector, Tape, Var};
use crate::math;
use crate::rng::seeded;
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RecurrentConfig {
    pub cell_size: usize,
    /// Observed steps used to build the hidden state.
    pub history: usize,
    /// Open-loop prediction steps that enter the loss.
    pub window: usize,
    /// Offset between consecutive training windows of a trajectory.
    pub stride: usize,
}

impl Default for RecurrentConfig {
    fn default() -> Self {
        Self {
            cell_size: 30,
            history: 30,
            window: 50,
            stride: 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DynamicsConfig {
    pub hidden: Vec<usize>,
    /// Upper bound; the best-validation epoch is kept.
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub lr_decay: f64,
    /// Stop after this many epochs without validation improvement.
    pub patience: Option<usize>,
    pub recurrent: Option<RecurrentConfig>,
}

impl Default for DynamicsConfig {
    fn default() -> Self {
        Self {
            hidden: vec![20, 10],
            epochs: 3000,
            batch_size: 32,
            learning_rate: 1e-3,
            lr_decay: 0.99,
            patience: Some(100),
            recurrent: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DynamicsMember {
    pub spec: NetworkSpec,
    pub params: ParamVector,
}

impl DynamicsMember {
    pub fn is_recurrent(&self) -> bool {
        self.spec.is_recurrent()
    }

    pub fn state_dim(&self) -> usize {
        self.spec.output_dim - 1
    }

    /// `(next_state_normalized, reward_unit, hidden')` for normalized `state`.
    pub fn predict(&self, state: &[f64], action: &[f64], hidden: Option<&[f64]>) -> Result<(Vec<f64>, f64, Option<Vec<f64>>)> {
        let mut input = Vec::with_capacity(state.len() + action.len());
        input.extend_from_slice(state);
        input.extend_from_slice(action);
        let (out, h) = self.spec.forward(&self.params, &input, hidden)?;
        let ds = self.state_dim();
        let next = state.iter().zip(&out[..ds]).map(|(s, d)| s + d).collect();
        Ok((next, out[ds], h))
    }

    pub fn initial_hidden(&self) -> Option<Vec<f64>> {
        self.spec.cell_size().map(|c| vec![0.0; c])
    }
}

/// Taped member step: returns `(next_state_normalized, reward_unit, hidden')`.
pub(crate) fn taped_member_step(
    net: &BoundNet,
    tape: &mut Tape,
    state: Var,
    action: Var,
    hidden: Option<Var>,
) -> Result<(Var, Var, Option<Var>)> {
    let ds = tape.shape(state).1;
    let x = tape.concat(&[state, action]);
    let (out, h) = match hidden {
        Some(h) => {
            let (o, h2) = net.step(tape, x, h)?;
            (o, Some(h2))
        }
        None => (net.forward(tape, x)?, None),
    };
    let delta = tape.slice_cols(out, 0, ds);
    let next = tape.add(state, delta);
    let reward = tape.slice_cols(out, ds, 1);
    Ok((next, reward, h))
}

#[derive(Clone, Debug)]
pub struct MemberTraining {
    pub member: DynamicsMember,
    pub best_val_mse: f64,
    pub final_val_mse: f64,
    pub best_epoch: usize,
    pub epochs_run: usize,
    pub val_history: Vec<f64>,
}

fn member_spec(norm: &NormStats, action_dim: usize, cfg: &DynamicsConfig) -> NetworkSpec {
    let ds = norm.state_dim();
    match &cfg.recurrent {
        Some(r) => NetworkSpec::recurrent(ds + action_dim, r.cell_size, &cfg.hidden, ds + 1),
        None => NetworkSpec::mlp(ds + action_dim, &cfg.hidden, ds + 1, OutputActivation::Identity),
    }
}

fn one_step_rows(dataset: &Dataset, norm: &NormStats) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    dataset
        .transitions()
        .map(|t| {
            let z = norm.normalize(&t.state);
            let zn = norm.normalize(&t.next_state);
            let mut x = z.clone();
            x.extend_from_slice(&t.action);
            let mut y: Vec<f64> = zn.iter().zip(&z).map(|(a, b)| a - b).collect();
            y.push(norm.reward_to_unit(t.reward));
            (x, y)
        })
        .unzip()
}

fn one_step_loss(spec: &NetworkSpec, params: &ParamVector, x: &Matrix, y: &Matrix) -> Result<(f64, Vec<f64>)> {
    crate::diffcore::mlp_mse_loss_and_grad(spec, params, x, y)
}

struct BestTracker {
    best: f64,
    best_epoch: usize,
    best_params: ParamVector,
    history: Vec<f64>,
}

impl BestTracker {
    fn new(params: &ParamVector) -> Self {
        Self {
            best: f64::INFINITY,
            best_epoch: 0,
            best_params: params.clone(),
            history: Vec::new(),
        }
    }

    /// Returns `true` when training should stop.
    fn observe(&mut self, epoch: usize, val: f64, params: &ParamVector, patience: Option<usize>) -> bool {
        self.history.push(val);
        if val < self.best {
            self.best = val;
            self.best_epoch = epoch;
            self.best_params = params.clone();
        }
        patience.is_some_and(|p| epoch - self.best_epoch >= p)
    }

    fn finish(self, spec: NetworkSpec) -> MemberTraining {
        MemberTraining {
            final_val_mse: *self.history.last().unwrap_or(&f64::NAN),
            epochs_run: self.history.len(),
            member: DynamicsMember {
                spec,
                params: self.best_params,
            },
            best_val_mse: self.best,
            best_epoch: self.best_epoch,
            val_history: self.history,
        }
    }
}

/// Trains a feedforward one-step member and keeps the best-validation parameters.
pub fn train_dynamics_member(
    train: &Dataset,
    val: &Dataset,
    norm: &NormStats,
    cfg: &DynamicsConfig,
    seed: u64,
) -> Result<MemberTraining> {
    if cfg.recurrent.is_some() {
        return Err(Error::InvalidConfig("use train_dynamics_recurrent for recurrent members".into()));
    }
    if train.is_empty() || val.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let spec = member_spec(norm, train.action_dim, cfg);
    spec.validate()?;
    let (xs, ys) = one_step_rows(train, norm);
    let (vx, vy) = one_step_rows(val, norm);
    let (vx, vy) = (Matrix::from_rows(&vx), Matrix::from_rows(&vy));
    let mut rng = seeded(seed);
    let mut params = spec.init(&mut rng);
    let mut adam = AdamState::new(params.len(), cfg.learning_rate, cfg.lr_decay);
    let mut tracker = BestTracker::new(&params);
    for epoch in 0..cfg.epochs {
        for batch in minibatches(xs.len(), cfg.batch_size, &mut rng) {
            let x = Matrix::from_rows(&batch.iter().map(|&i| &xs[i][..]).collect::<Vec<_>>());
            let y = Matrix::from_rows(&batch.iter().map(|&i| &ys[i][..]).collect::<Vec<_>>());
            let (loss, grad) = one_step_loss(&spec, &params, &x, &y)?;
            if !loss.is_finite() {
                return Err(Error::Divergence { epoch, loss });
            }
            adam_update(&mut params, &grad, &mut adam).map_err(|_| Error::Divergence { epoch, loss })?;
        }
        adam.end_epoch();
        let (val_loss, _) = one_step_loss(&spec, &params, &vx, &vy)?;
        if !val_loss.is_finite() {
            return Err(Error::Divergence { epoch, loss: val_loss });
        }
        if tracker.observe(epoch, val_loss, &params, cfg.patience) {
            break;
        }
    }
    Ok(tracker.finish(spec))
}

/// One training window: `history` observed steps followed by `window` open-loop steps.
#[derive(Clone, Debug)]
struct Window {
    /// Normalized states `s_0 ..= s_{G+F}`.
    states: Vec<Vec<f64>>,
    actions: Vec<Vec<f64>>,
    /// Unit-scaled rewards of the transitions.
    rewards: Vec<f64>,
}

fn windows(dataset: &Dataset, norm: &NormStats, history: usize, window: usize, stride: usize) -> Result<Vec<Window>> {
    let need = history + window;
    let mut out = Vec::new();
    for traj in &dataset.trajectories {
        if traj.len() < need {
            return Err(Error::TrajectoryTooShort {
                episode: traj.episode_id,
                len: traj.len(),
                needed: need,
            });
        }
        let mut start = 0;
        while start + need <= traj.len() {
            let ts = &traj.transitions[start..start + need];
            let mut states: Vec<Vec<f64>> = ts.iter().map(|t| norm.normalize(&t.state)).collect();
            states.push(norm.normalize(&ts[need - 1].next_state));
            out.push(Window {
                states,
                actions: ts.iter().map(|t| t.action.clone()).collect(),
                rewards: ts.iter().map(|t| norm.reward_to_unit(t.reward)).collect(),
            });
            start += stride.max(1);
        }
    }
    Ok(out)
}

/// Loss of a batch of windows, kept per open-loop step.
#[derive(Clone, Debug, PartialEq)]
pub struct WindowLoss {
    pub total: f64,
    pub per_step: Vec<f64>,
}

fn rows_at<'a>(batch: &'a [&Window], f: impl Fn(&'a Window) -> &'a [f64]) -> Matrix {
    Matrix::from_rows(&batch.iter().map(|w| f(w)).collect::<Vec<_>>())
}

/// Warm-up over `history` true steps, then `window` steps feeding predictions back.
fn taped_window_loss(
    net: &BoundNet,
    tape: &mut Tape,
    batch: &[&Window],
    history: usize,
    window: usize,
    cell: usize,
) -> Result<(Var, Vec<Var>)> {
    let mut h = tape.constant(Matrix::zeros(batch.len(), cell));
    for t in 0..history {
        let s = tape.constant(rows_at(batch, |w| &w.states[t]));
        let a = tape.constant(rows_at(batch, |w| &w.actions[t]));
        let x = tape.concat(&[s, a]);
        h = net.step(tape, x, h)?.1;
    }
    let mut state = tape.constant(rows_at(batch, |w| &w.states[history]));
    let mut terms = Vec::with_capacity(window);
    for f in 0..window {
        let t = history + f;
        let a = tape.constant(rows_at(batch, |w| &w.actions[t]));
        let (next, reward, h2) = taped_member_step(net, tape, state, a, Some(h))?;
        h = h2.expect("recurrent step");
        let pred = tape.concat(&[next, reward]);
        let target: Vec<Vec<f64>> = batch
            .iter()
            .map(|w| {
                let mut y = w.states[t + 1].clone();
                y.push(w.rewards[t]);
                y
            })
            .collect();
        let target = tape.constant(Matrix::from_rows(&target));
        terms.push(mse(tape, pred, target));
        state = next;
    }
    let mut total = terms[0];
    for &term in &terms[1..] {
        total = tape.add(total, term);
    }
    Ok((total, terms))
}

/// Evaluates the summed F-step loss of a recurrent member on `dataset`.
pub fn recurrent_window_loss(
    member: &DynamicsMember,
    dataset: &Dataset,
    norm: &NormStats,
    history: usize,
    window: usize,
) -> Result<WindowLoss> {
    let cell = member.spec.cell_size().ok_or_else(|| Error::InvalidConfig("member is not recurrent".into()))?;
    if window == 0 {
        return Err(Error::InvalidConfig("prediction window must be positive".into()));
    }
    let ws = windows(dataset, norm, history, window, 1)?;
    let batch: Vec<&Window> = ws.iter().collect();
    let mut tape = Tape::new();
    let net = member.spec.bind(&mut tape, &member.params, false)?;
    let (total, terms) = taped_window_loss(&net, &mut tape, &batch, history, window, cell)?;
    Ok(WindowLoss {
        total: tape.scalar(total),
        per_step: terms.iter().map(|&t| tape.scalar(t)).collect(),
    })
}

/// Trains a recurrent member on G-step warm-up plus F-step open-loop windows.
pub fn train_dynamics_recurrent(
    train: &Dataset,
    val: &Dataset,
    norm: &NormStats,
    cfg: &DynamicsConfig,
    seed: u64,
) -> Result<MemberTraining> {
    let rc = cfg
        .recurrent
        .clone()
        .ok_or_else(|| Error::InvalidConfig("recurrent settings missing".into()))?;
    if rc.window == 0 {
        return Err(Error::InvalidConfig("prediction window must be positive".into()));
    }
    let spec = member_spec(norm, train.action_dim, cfg);
    spec.validate()?;
    let train_w = windows(train, norm, rc.history, rc.window, rc.stride)?;
    let val_w = windows(val, norm, rc.history, rc.window, rc.stride)?;
    if train_w.is_empty() || val_w.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let val_batch: Vec<&Window> = val_w.iter().collect();
    let mut rng = seeded(seed);
    let mut params = spec.init(&mut rng);
    let mut adam = AdamState::new(params.len(), cfg.learning_rate, cfg.lr_decay);
    let mut tracker = BestTracker::new(&params);
    for epoch in 0..cfg.epochs {
        for idx in minibatches(train_w.len(), cfg.batch_size, &mut rng) {
            let batch: Vec<&Window> = idx.iter().map(|&i| &train_w[i]).collect();
            let mut tape = Tape::new();
            let net = spec.bind(&mut tape, &params, true)?;
            let (total, _) = taped_window_loss(&net, &mut tape, &batch, rc.history, rc.window, rc.cell_size)?;
            let loss = tape.scalar(total);
            if !loss.is_finite() {
                return Err(Error::Divergence { epoch, loss });
            }
            let grads = tape.backward(total)?;
            let g = net.gradient(&tape, &grads);
            adam_update(&mut params, &g, &mut adam).map_err(|_| Error::Divergence { epoch, loss })?;
        }
        adam.end_epoch();
        let mut tape = Tape::new();
        let net = spec.bind(&mut tape, &params, false)?;
        let (total, _) = taped_window_loss(&net, &mut tape, &val_batch, rc.history, rc.window, rc.cell_size)?;
        let val_loss = tape.scalar(total);
        if !val_loss.is_finite() {
            return Err(Error::Divergence { epoch, loss: val_loss });
        }
        if tracker.observe(epoch, val_loss, &params, cfg.patience) {
            break;
        }
    }
    Ok(tracker.finish(spec))
}

/// RMSE (raw state units) of `window`-step open-loop predictions after
/// `history` observed steps. Feedforward members ignore the history.
pub fn open_loop_rmse(member: &DynamicsMember, dataset: &Dataset, norm: &NormStats, history: usize, window: usize) -> Result<f64> {
    let ws = windows(dataset, norm, history, window, 1)?;
    let mut sq = 0.0;
    let mut count = 0usize;
    for w in &ws {
        let mut hidden = member.initial_hidden();
        if member.is_recurrent() {
            for t in 0..history {
                hidden = member.predict(&w.states[t], &w.actions[t], hidden.as_deref())?.2;
            }
        }
        let mut state = w.states[history].clone();
        for f in 0..window {
            let t = history + f;
            let (next, _, h) = member.predict(&state, &w.actions[t], hidden.as_deref())?;
            hidden = h;
            let pred = norm.denormalize(&next);
            let truth = norm.denormalize(&w.states[t + 1]);
            sq += pred.iter().zip(&truth).map(|(a, b)| (a - b) * (a - b)).sum::<f64>();
            count += pred.len();
            state = next;
        }
    }
    if count == 0 {
        return Err(Error::EmptyDataset);
    }
    Ok(math::sqrt(sq / count as f64))
}
