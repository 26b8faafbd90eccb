//! The single-writer session state machine, independent of any transport.

use std::collections::{BTreeMap, VecDeque};

use lion_core::envs::Environment;
use lion_core::lion::{compute_penalty, LionPolicy};
use lion_core::models::BehaviorNet;
use lion_core::rng::{seeded, Rng};
use serde::{Deserialize, Serialize};

use crate::envs::{AnyEnv, AnyState, EnvConfig};
use crate::error::{Error, Result};

/// Published per step.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StreamEvent {
    /// Step index within the episode, from 0.
    pub t: usize,
    pub episode: u64,
    /// Session-wide step counter, from 0.
    pub step: u64,
    pub state: Vec<f64>,
    pub action: Vec<f64>,
    pub reward: f64,
    pub next_state: Vec<f64>,
    pub lambda: f64,
    /// The λ in effect came from a request outside `[0, 1]`.
    pub lambda_clamped: bool,
    /// Mean over action dimensions of `(π(s, λ) − β(s))²`.
    pub distance: f64,
    /// Last step of the episode; the next event starts a new one.
    pub done: bool,
}

/// A λ value that takes effect from session step `from_step` on.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LambdaChange {
    pub from_step: u64,
    pub lambda: f64,
    pub clamped: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LambdaAck {
    pub requested: f64,
    pub lambda: f64,
    pub clamped: bool,
    pub from_step: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum Mode {
    Paused,
    /// Runs `remaining` more steps at `steps_per_sec`, then pauses.
    Stepping { remaining: u64, steps_per_sec: f64 },
    AutoRun { steps_per_sec: f64 },
}

impl Mode {
    pub fn rate(&self) -> Option<f64> {
        match *self {
            Mode::Paused => None,
            Mode::Stepping { steps_per_sec, .. } | Mode::AutoRun { steps_per_sec } => Some(steps_per_sec),
        }
    }
}

/// Statistics of every step taken at one λ.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LambdaRow {
    pub lambda: f64,
    pub steps: u64,
    pub mean_reward: f64,
    pub mean_distance: f64,
    /// Episodes run entirely at this λ.
    pub episodes: u64,
    pub mean_episode_return: Option<f64>,
    #[serde(skip)]
    reward_sum: f64,
    #[serde(skip)]
    distance_sum: f64,
    #[serde(skip)]
    return_sum: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SessionReport {
    pub rows: Vec<LambdaRow>,
    /// Mean return of the last `window` completed episodes.
    pub windowed_return: Option<f64>,
    /// Mean distance over the last `window · episode_length` steps.
    pub windowed_distance: Option<f64>,
    pub window: usize,
    pub episodes_completed: u64,
    pub steps: u64,
}

/// What a session is built from; together with the λ log it determines every event.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SessionSpec {
    pub env: EnvConfig,
    pub seed: u64,
    /// Completed episodes in the rolling window.
    pub window: usize,
}

pub struct Session {
    spec: SessionSpec,
    env: AnyEnv,
    policy: LionPolicy,
    behavior: BehaviorNet,
    rng: Rng,
    state: AnyState,
    lambda: f64,
    clamped: bool,
    t: usize,
    episode: u64,
    step: u64,
    episode_return: f64,
    episode_lambdas: Option<f64>,
    mixed_episode: bool,
    log: Vec<LambdaChange>,
    rows: BTreeMap<u64, LambdaRow>,
    recent_returns: VecDeque<f64>,
    recent_distances: VecDeque<f64>,
    episodes_completed: u64,
}

fn check_dims(env: &AnyEnv, policy: &LionPolicy, behavior: &BehaviorNet) -> Result<()> {
    let pairs = [
        ("policy state", policy.state_dim(), env.observation_dim()),
        ("policy action", policy.action_dim(), env.action_dim()),
        ("behavior state", behavior.norm.state_dim(), env.observation_dim()),
        ("behavior action", behavior.spec.output_dim, env.action_dim()),
    ];
    for (what, found, expected) in pairs {
        if found != expected {
            return Err(Error::Config(format!(
                "{what} dimension {found} does not match environment '{}' ({expected})",
                env.name()
            )));
        }
    }
    Ok(())
}

impl Session {
    /// A fresh session: paused at λ = 0 at the start of episode 0.
    pub fn new(spec: SessionSpec, policy: LionPolicy, behavior: BehaviorNet) -> Result<Self> {
        if spec.window == 0 {
            return Err(Error::Config("window must be positive".into()));
        }
        let env = spec.env.build()?;
        check_dims(&env, &policy, &behavior)?;
        let mut rng = seeded(spec.seed);
        let state = env.sample_start(&mut rng);
        Ok(Self {
            spec,
            env,
            policy,
            behavior,
            rng,
            state,
            lambda: 0.0,
            clamped: false,
            t: 0,
            episode: 0,
            step: 0,
            episode_return: 0.0,
            episode_lambdas: None,
            mixed_episode: false,
            log: Vec::new(),
            rows: BTreeMap::new(),
            recent_returns: VecDeque::new(),
            recent_distances: VecDeque::new(),
            episodes_completed: 0,
        })
    }

    pub fn spec(&self) -> &SessionSpec {
        &self.spec
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn steps(&self) -> u64 {
        self.step
    }

    pub fn episode(&self) -> u64 {
        self.episode
    }

    pub fn observation(&self) -> Vec<f64> {
        self.env.observe(&self.state)
    }

    pub fn env(&self) -> &AnyEnv {
        &self.env
    }

    pub fn policy(&self) -> &LionPolicy {
        &self.policy
    }

    pub fn lambda_log(&self) -> &[LambdaChange] {
        &self.log
    }

    /// Clamps into `[0, 1]`; the value applies from the next step.
    pub fn set_lambda(&mut self, requested: f64) -> Result<LambdaAck> {
        if requested.is_nan() {
            return Err(Error::Config("lambda must be a number".into()));
        }
        let lambda = requested.clamp(0.0, 1.0);
        let clamped = lambda != requested;
        self.lambda = lambda;
        self.clamped = clamped;
        self.log.push(LambdaChange {
            from_step: self.step,
            lambda,
            clamped,
        });
        Ok(LambdaAck {
            requested,
            lambda,
            clamped,
            from_step: self.step,
        })
    }

    pub fn step(&mut self) -> Result<StreamEvent> {
        let obs = self.env.observe(&self.state);
        let action = self.policy.act(&obs, self.lambda)?;
        let distance = compute_penalty(&self.behavior.act(&obs), &action);
        let (next, reward) = self.env.step(&self.state, &action);
        let next_obs = self.env.observe(&next);
        let done = self.t + 1 == self.env.episode_length();
        let event = StreamEvent {
            t: self.t,
            episode: self.episode,
            step: self.step,
            state: obs,
            action,
            reward,
            next_state: next_obs,
            lambda: self.lambda,
            lambda_clamped: self.clamped,
            distance,
            done,
        };
        self.record(&event);
        self.step += 1;
        if done {
            self.state = self.env.sample_start(&mut self.rng);
            self.t = 0;
            self.episode += 1;
        } else {
            self.state = next;
            self.t += 1;
        }
        Ok(event)
    }

    pub fn step_n(&mut self, n: usize) -> Result<Vec<StreamEvent>> {
        (0..n).map(|_| self.step()).collect()
    }

    fn record(&mut self, e: &StreamEvent) {
        let row = self.rows.entry(e.lambda.to_bits()).or_insert_with(|| LambdaRow {
            lambda: e.lambda,
            ..Default::default()
        });
        row.steps += 1;
        row.reward_sum += e.reward;
        row.distance_sum += e.distance;
        row.mean_reward = row.reward_sum / row.steps as f64;
        row.mean_distance = row.distance_sum / row.steps as f64;

        let cap = self.spec.window * self.env.episode_length();
        self.recent_distances.push_back(e.distance);
        if self.recent_distances.len() > cap {
            self.recent_distances.pop_front();
        }
        self.episode_return += e.reward;
        match self.episode_lambdas {
            None => self.episode_lambdas = Some(e.lambda),
            Some(l) if l != e.lambda => self.mixed_episode = true,
            _ => {}
        }
        if e.done {
            if !self.mixed_episode {
                let row = self.rows.get_mut(&e.lambda.to_bits()).expect("row exists");
                row.episodes += 1;
                row.return_sum += self.episode_return;
                row.mean_episode_return = Some(row.return_sum / row.episodes as f64);
            }
            self.recent_returns.push_back(self.episode_return);
            if self.recent_returns.len() > self.spec.window {
                self.recent_returns.pop_front();
            }
            self.episodes_completed += 1;
            self.episode_return = 0.0;
            self.episode_lambdas = None;
            self.mixed_episode = false;
        }
    }

    pub fn report(&self) -> SessionReport {
        let mean = |v: &VecDeque<f64>| (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64);
        let mut rows: Vec<LambdaRow> = self.rows.values().cloned().collect();
        rows.sort_by(|a, b| a.lambda.total_cmp(&b.lambda));
        SessionReport {
            rows,
            windowed_return: mean(&self.recent_returns),
            windowed_distance: mean(&self.recent_distances),
            window: self.spec.window,
            episodes_completed: self.episodes_completed,
            steps: self.step,
        }
    }

    /// Rebuilds the event sequence of the first `steps` steps from the spec and a λ log.
    pub fn replay(
        spec: SessionSpec,
        policy: LionPolicy,
        behavior: BehaviorNet,
        log: &[LambdaChange],
        steps: u64,
    ) -> Result<Vec<StreamEvent>> {
        let mut s = Session::new(spec, policy, behavior)?;
        let mut changes = log.iter().peekable();
        let mut out = Vec::with_capacity(steps as usize);
        for _ in 0..steps {
            while let Some(c) = changes.next_if(|c| c.from_step <= s.step) {
                s.lambda = c.lambda;
                s.clamped = c.clamped;
                s.log.push(*c);
            }
            out.push(s.step()?);
        }
        Ok(out)
    }
}

/// Actions of `π(·, λ)` on an `n × n` grid over the environment bounds, with the reward there.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuiverPoint {
    pub x: f64,
    pub y: f64,
    pub action: Vec<f64>,
    pub reward: f64,
}

pub fn quiver(env: &AnyEnv, policy: &LionPolicy, lambda: f64, n: usize) -> Result<Vec<QuiverPoint>> {
    let cfg = env.reward_config();
    let (lo, hi) = (cfg.bounds.low, cfg.bounds.high);
    let coord = |i: usize, d: usize| {
        if n == 1 {
            0.5 * (lo[d] + hi[d])
        } else {
            lo[d] + (hi[d] - lo[d]) * i as f64 / (n - 1) as f64
        }
    };
    let mut out = Vec::with_capacity(n * n);
    for j in 0..n {
        for i in 0..n {
            let p = [coord(i, 0), coord(j, 1)];
            out.push(QuiverPoint {
                x: p[0],
                y: p[1],
                action: policy.act(&p, lambda)?,
                reward: lion_core::envs::reward_2d(p, cfg),
            });
        }
    }
    Ok(out)
}
