use alloc::format;
use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::baselines::{adjacency, empty_report};
use super::eval::{lambda_sweep, SweepConfig};
use super::report::{BaselineMethod, BaselineReport, Finding};
use crate::data::{compute_norm_stats, Dataset, NormStats};
use crate::diffcore::{adam_update, mlp_mse_loss_and_grad, AdamState, Matrix, NetworkSpec, OutputActivation, ParamVector, Tape};
use crate::envs::Environment;
use crate::lion::{normalize_reward, Conditioning, LambdaSampler, LionPolicy};
use crate::models::BehaviorNet;
use crate::rng::{derive_seed, index, seeded, Rng};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Td3bcConfig {
    pub gamma: f64,
    pub tau: f64,
    pub alpha: f64,
    pub policy_noise: f64,
    pub noise_clip: f64,
    pub policy_delay: usize,
    pub updates: usize,
    pub batch: usize,
    pub actor_hidden: Vec<usize>,
    pub critic_hidden: Vec<usize>,
    pub actor_lr: f64,
    pub critic_lr: f64,
    pub beta_a: f64,
    pub beta_b: f64,
    pub seed: u64,
}

impl Default for Td3bcConfig {
    fn default() -> Self {
        Self {
            gamma: 0.97,
            tau: 0.005,
            alpha: 2.5,
            policy_noise: 0.2,
            noise_clip: 0.5,
            policy_delay: 2,
            updates: 10_000,
            batch: 64,
            actor_hidden: vec![64, 64],
            critic_hidden: vec![64, 64],
            actor_lr: 3e-4,
            critic_lr: 3e-4,
            beta_a: 0.1,
            beta_b: 0.1,
            seed: 0,
        }
    }
}

impl Td3bcConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = (0.0..1.0).contains(&self.gamma)
            && self.tau > 0.0
            && self.tau <= 1.0
            && self.alpha >= 0.0
            && self.policy_noise >= 0.0
            && self.noise_clip >= 0.0
            && self.policy_delay >= 1
            && self.batch >= 1
            && self.actor_lr > 0.0
            && self.critic_lr > 0.0;
        if !ok {
            return Err(Error::InvalidConfig("invalid lambda-TD3+BC configuration".into()));
        }
        LambdaSampler::new(self.beta_a, self.beta_b).map(|_| ())
    }
}

/// λ-conditioned twin critic Q(s, a, λ) over normalized states.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Critic {
    pub spec: NetworkSpec,
    pub params: ParamVector,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Td3Record {
    pub update: usize,
    pub critic_loss: f64,
    pub actor_loss: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct Td3Training {
    pub policy: LionPolicy,
    pub critics: [Critic; 2],
    pub log: Vec<Td3Record>,
    /// Divergence that stopped training early; `policy` is then the last finite one.
    pub diverged: Option<Error>,
}

struct Batch {
    z: Vec<Vec<f64>>,
    a: Vec<Vec<f64>>,
    r: Vec<f64>,
    z_next: Vec<Vec<f64>>,
    lambda: Vec<f64>,
}

fn forward_values(spec: &NetworkSpec, params: &ParamVector, x: Matrix) -> Result<Matrix> {
    let mut tape = Tape::new();
    let net = spec.bind(&mut tape, params, false)?;
    let x = tape.constant(x);
    let y = net.forward(&mut tape, x)?;
    Ok(tape.value(y).clone())
}

fn rows_with(parts: &[&[Vec<f64>]], last: &[f64]) -> Matrix {
    let rows: Vec<Vec<f64>> = (0..last.len())
        .map(|i| {
            let mut r = Vec::new();
            for p in parts {
                r.extend_from_slice(&p[i]);
            }
            r.push(last[i]);
            r
        })
        .collect();
    Matrix::from_rows(&rows)
}

fn soft_update(target: &mut ParamVector, source: &ParamVector, tau: f64) {
    for (t, s) in target.values.iter_mut().zip(&source.values) {
        *t = tau * s + (1.0 - tau) * *t;
    }
}

/// Bellman targets `r + γ · min_j Q_j^t(s', π^t(s', λ) + clipped noise, λ)`.
pub fn critic_targets(
    batch_r: &[f64],
    q_next: [&[f64]; 2],
    gamma: f64,
) -> Vec<f64> {
    batch_r
        .iter()
        .enumerate()
        .map(|(i, r)| r + gamma * q_next[0][i].min(q_next[1][i]))
        .collect()
}

/// λ-TD3+BC: the TD3+BC critic and actor objectives with λ appended to both
/// networks, the Q term weighted by λ and the behavior term by `1 − λ`.
pub fn train_lambda_td3bc(dataset: &Dataset, cfg: &Td3bcConfig) -> Result<Td3Training> {
    cfg.validate()?;
    if dataset.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let norm = compute_norm_stats(dataset)?;
    let transitions: Vec<_> = dataset.transitions().collect();
    let (sd, ad) = (dataset.state_dim, dataset.action_dim);
    let unit_reward = |r: f64| -> Result<f64> {
        if norm.reward_max > norm.reward_min {
            Ok(normalize_reward(r, &norm)? / 4.0)
        } else {
            Ok(0.0)
        }
    };
    let sampler = LambdaSampler::new(cfg.beta_a, cfg.beta_b)?;
    let mut init_rng = seeded(derive_seed(cfg.seed, 1));
    let mut batch_rng = seeded(derive_seed(cfg.seed, 2));
    let mut lambda_rng = seeded(derive_seed(cfg.seed, 3));
    let mut noise_rng = seeded(derive_seed(cfg.seed, 4));
    let noise = Normal::new(0.0, cfg.policy_noise.max(1e-300)).map_err(|e| Error::InvalidConfig(e.to_string()))?;

    let mut policy = LionPolicy::init(&norm, ad, &cfg.actor_hidden, Conditioning::Input, &mut init_rng);
    let critic_spec = NetworkSpec::mlp(sd + ad + 1, &cfg.critic_hidden, 1, OutputActivation::Identity);
    let mut critics = [
        Critic {
            params: critic_spec.init(&mut init_rng),
            spec: critic_spec.clone(),
        },
        Critic {
            params: critic_spec.init(&mut init_rng),
            spec: critic_spec.clone(),
        },
    ];
    let mut target_policy = policy.params.clone();
    let mut target_critics = [critics[0].params.clone(), critics[1].params.clone()];
    let mut actor_adam = AdamState::new(policy.params.len(), cfg.actor_lr, 1.0);
    let mut critic_adam = [
        AdamState::new(critics[0].params.len(), cfg.critic_lr, 1.0),
        AdamState::new(critics[1].params.len(), cfg.critic_lr, 1.0),
    ];
    let mut log = Vec::with_capacity(cfg.updates);
    let mut last_good = policy.clone();

    for update in 0..cfg.updates {
        let step = td3_step(
            cfg,
            &norm,
            &transitions,
            &unit_reward,
            &sampler,
            &noise,
            (&mut batch_rng, &mut lambda_rng, &mut noise_rng),
            &mut policy,
            &mut critics,
            &mut target_policy,
            &mut target_critics,
            &mut actor_adam,
            &mut critic_adam,
            update,
        );
        match step {
            Ok(record) => {
                log.push(record);
                last_good = policy.clone();
            }
            Err(e) => {
                return Ok(Td3Training {
                    policy: last_good,
                    critics,
                    log,
                    diverged: Some(e),
                })
            }
        }
    }
    Ok(Td3Training {
        policy,
        critics,
        log,
        diverged: None,
    })
}

#[allow(clippy::too_many_arguments)]
fn td3_step(
    cfg: &Td3bcConfig,
    norm: &NormStats,
    transitions: &[&crate::data::Transition],
    unit_reward: &dyn Fn(f64) -> Result<f64>,
    sampler: &LambdaSampler,
    noise: &Normal<f64>,
    rngs: (&mut Rng, &mut Rng, &mut Rng),
    policy: &mut LionPolicy,
    critics: &mut [Critic; 2],
    target_policy: &mut ParamVector,
    target_critics: &mut [ParamVector; 2],
    actor_adam: &mut AdamState,
    critic_adam: &mut [AdamState; 2],
    update: usize,
) -> Result<Td3Record> {
    let (batch_rng, lambda_rng, noise_rng) = rngs;
    let idx: Vec<usize> = (0..cfg.batch).map(|_| index(batch_rng, transitions.len())).collect();
    let b = Batch {
        z: idx.iter().map(|&i| norm.normalize(&transitions[i].state)).collect(),
        a: idx.iter().map(|&i| transitions[i].action.clone()).collect(),
        r: idx.iter().map(|&i| unit_reward(transitions[i].reward)).collect::<Result<_>>()?,
        z_next: idx.iter().map(|&i| norm.normalize(&transitions[i].next_state)).collect(),
        lambda: (0..cfg.batch).map(|_| sampler.sample(lambda_rng)).collect(),
    };

    let next_actions = forward_values(&policy.spec, target_policy, rows_with(&[&b.z_next], &b.lambda))?;
    let smoothed: Vec<Vec<f64>> = (0..cfg.batch)
        .map(|i| {
            next_actions
                .row(i)
                .iter()
                .map(|&a| (a + noise.sample(noise_rng).clamp(-cfg.noise_clip, cfg.noise_clip)).clamp(-1.0, 1.0))
                .collect()
        })
        .collect();
    let next_in = rows_with(&[&b.z_next, &smoothed], &b.lambda);
    let q1 = forward_values(&critics[0].spec, &target_critics[0], next_in.clone())?;
    let q2 = forward_values(&critics[1].spec, &target_critics[1], next_in)?;
    let y = critic_targets(&b.r, [q1.data(), q2.data()], cfg.gamma);
    let inputs = rows_with(&[&b.z, &b.a], &b.lambda);
    let targets = Matrix::column(&y);
    let mut critic_loss = 0.0;
    for j in 0..2 {
        let (loss, grad) = mlp_mse_loss_and_grad(&critics[j].spec, &critics[j].params, &inputs, &targets)?;
        if !loss.is_finite() {
            return Err(Error::Divergence { epoch: update, loss });
        }
        adam_update(&mut critics[j].params, &grad, &mut critic_adam[j]).map_err(|_| Error::Divergence { epoch: update, loss })?;
        critic_loss += loss;
    }

    let mut actor_loss = None;
    if (update + 1) % cfg.policy_delay == 0 {
        let (loss, grad) = actor_loss_and_grad(policy, &critics[0], &b.z, &b.a, &b.lambda, cfg.alpha)?;
        if !loss.is_finite() {
            return Err(Error::Divergence { epoch: update, loss });
        }
        adam_update(&mut policy.params, &grad, actor_adam).map_err(|_| Error::Divergence { epoch: update, loss })?;
        actor_loss = Some(loss);
        soft_update(target_policy, &policy.params, cfg.tau);
        for j in 0..2 {
            soft_update(&mut target_critics[j], &critics[j].params, cfg.tau);
        }
    }
    Ok(Td3Record {
        update,
        critic_loss,
        actor_loss,
    })
}

/// `mean_i [ −λ_i · α / mean|Q| · Q(s_i, π(s_i, λ_i), λ_i) + (1 − λ_i) · mean_d (π − a)² ]`,
/// with the `α / mean|Q|` factor held constant.
pub fn actor_loss_and_grad(
    policy: &LionPolicy,
    critic: &Critic,
    z: &[Vec<f64>],
    actions: &[Vec<f64>],
    lambdas: &[f64],
    alpha: f64,
) -> Result<(f64, Vec<f64>)> {
    let mut tape = Tape::new();
    let pi = policy.spec.bind(&mut tape, &policy.params, true)?;
    let q = critic.spec.bind(&mut tape, &critic.params, false)?;
    let zl = tape.constant(rows_with(&[z], lambdas));
    let a = pi.forward(&mut tape, zl)?;
    let zc = tape.constant(Matrix::from_rows(z));
    let lc = tape.constant(Matrix::column(lambdas));
    let q_in = tape.concat(&[zc, a, lc]);
    let qv = q.forward(&mut tape, q_in)?;
    let mean_abs = tape.value(qv).data().iter().map(|v| v.abs()).sum::<f64>() / lambdas.len() as f64;
    let k = if mean_abs > 0.0 { alpha / mean_abs } else { 0.0 };
    let neg_l: Vec<f64> = lambdas.iter().map(|l| -k * l).collect();
    let w_q = tape.constant(Matrix::column(&neg_l));
    let q_term = tape.row_scale(qv, w_q);
    let target = tape.constant(Matrix::from_rows(actions));
    let d = tape.sub(a, target);
    let sq = tape.square(d);
    let pen = tape.row_mean(sq);
    let one_minus: Vec<f64> = lambdas.iter().map(|l| 1.0 - l).collect();
    let w_p = tape.constant(Matrix::column(&one_minus));
    let p_term = tape.row_scale(pen, w_p);
    let per_row = tape.add(q_term, p_term);
    let loss = tape.mean(per_row);
    let grads = tape.backward(loss)?;
    Ok((tape.scalar(loss), pi.gradient(&tape, &grads)))
}

/// λ-sweep of a λ-TD3+BC policy; records whether its behavior collapsed.
pub fn lambda_td3bc_report<E: Environment>(
    env: &E,
    dataset: &Dataset,
    behavior: &BehaviorNet,
    training: &Td3Training,
    sweep: &SweepConfig,
) -> Result<BaselineReport> {
    let result = lambda_sweep(env, &training.policy, behavior, dataset, sweep)?;
    let states = super::eval::distance_states(dataset, sweep.distance_states, sweep.seed);
    let mut report = empty_report(BaselineMethod::LambdaTd3bc, result.grid.clone());
    report.mean_return = result.mean_return.clone();
    report.return_stderr = result.return_stderr.clone();
    report.behavior_distance = result.mean_distance.clone();
    report.adjacency = adjacency(&states, result.grid.len(), |i, s| training.policy.act(s, result.grid[i]))?;
    let mut spread = 0.0;
    for s in &states {
        let a0 = training.policy.act(s, 0.0)?;
        let a1 = training.policy.act(s, 1.0)?;
        spread += crate::math::sqrt(a0.iter().zip(&a1).map(|(x, y)| (x - y) * (x - y)).sum::<f64>());
    }
    spread /= states.len().max(1) as f64;
    report.findings.push(Finding::new(
        "lambda_td3bc_collapse",
        "behavior does not change across the lambda range",
        spread < 0.2,
        format!("mean |pi(s,0) - pi(s,1)| = {spread:.4}"),
    ));
    report.error = training.diverged.as_ref().map(|e| e.to_string());
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::uniform;

    #[test]
    fn zero_discount_target_is_reward() {
        let r = [0.3, -0.2, 1.0];
        let q = [5.0, 7.0, -1.0];
        assert_eq!(critic_targets(&r, [&q, &q], 0.0), r.to_vec());
        let q2 = [4.0, 8.0, -3.0];
        assert_eq!(critic_targets(&r, [&q, &q2], 0.5), vec![0.3 + 2.0, -0.2 + 3.5, 1.0 - 1.5]);
    }

    fn toy(rng: &mut Rng) -> (LionPolicy, Critic, Vec<Vec<f64>>, Vec<Vec<f64>>) {
        let norm = NormStats {
            state_mean: vec![0.0, 0.0],
            state_std: vec![1.0, 1.0],
            reward_min: 0.0,
            reward_max: 1.0,
            floored_dims: vec![],
        };
        let policy = LionPolicy::init(&norm, 2, &[8], Conditioning::Input, rng);
        let spec = NetworkSpec::mlp(5, &[8], 1, OutputActivation::Identity);
        let critic = Critic {
            params: spec.init(rng),
            spec,
        };
        let z: Vec<Vec<f64>> = (0..6).map(|_| vec![uniform(rng, -1.0, 1.0), uniform(rng, -1.0, 1.0)]).collect();
        let a: Vec<Vec<f64>> = (0..6).map(|_| vec![uniform(rng, -1.0, 1.0), uniform(rng, -1.0, 1.0)]).collect();
        (policy, critic, z, a)
    }

    #[test]
    fn lambda_zero_actor_loss_is_behavior_regression() {
        let mut rng = seeded(3);
        let (policy, critic, z, a) = toy(&mut rng);
        let lambdas = vec![0.0; z.len()];
        let (loss, grad) = actor_loss_and_grad(&policy, &critic, &z, &a, &lambdas, 2.5).unwrap();
        let inputs = rows_with(&[&z], &lambdas);
        let (mse, mse_grad) = mlp_mse_loss_and_grad(&policy.spec, &policy.params, &inputs, &Matrix::from_rows(&a)).unwrap();
        assert!((loss - mse).abs() < 1e-12);
        for (g, h) in grad.iter().zip(&mse_grad) {
            assert!((g - h).abs() < 1e-12);
        }
        let mut other = critic.clone();
        other.params.values.iter_mut().for_each(|v| *v *= -3.0);
        let (loss2, grad2) = actor_loss_and_grad(&policy, &other, &z, &a, &lambdas, 2.5).unwrap();
        assert_eq!(loss, loss2);
        assert_eq!(grad, grad2);
    }

    #[test]
    fn actor_gradient_matches_finite_differences() {
        let mut rng = seeded(8);
        let (policy, critic, z, a) = toy(&mut rng);
        let lambdas = vec![0.0, 0.2, 0.5, 0.9, 1.0, 0.7];
        let err = crate::diffcore::finite_diff_check(&policy.params, 1e-6, |p| {
            let mut q = policy.clone();
            q.params = p.clone();
            // k = α / mean|Q| depends on θ through Q; hold it fixed by evaluating at the base point.
            let (_, g) = actor_loss_and_grad(&q, &critic, &z, &a, &lambdas, 2.5)?;
            let l = fixed_k_loss(&q, &critic, &z, &a, &lambdas, fixed_k(&policy, &critic, &z, &lambdas, 2.5))?;
            Ok((l, g))
        })
        .unwrap();
        assert!(err < 1e-4, "{err}");
    }

    fn fixed_k(policy: &LionPolicy, critic: &Critic, z: &[Vec<f64>], lambdas: &[f64], alpha: f64) -> f64 {
        let acts = forward_values(&policy.spec, &policy.params, rows_with(&[z], lambdas)).unwrap();
        let acts: Vec<Vec<f64>> = (0..z.len()).map(|i| acts.row(i).to_vec()).collect();
        let q = forward_values(&critic.spec, &critic.params, rows_with(&[z, &acts], lambdas)).unwrap();
        alpha / (q.data().iter().map(|v| v.abs()).sum::<f64>() / z.len() as f64)
    }

    fn fixed_k_loss(policy: &LionPolicy, critic: &Critic, z: &[Vec<f64>], a: &[Vec<f64>], lambdas: &[f64], k: f64) -> Result<f64> {
        let acts = forward_values(&policy.spec, &policy.params, rows_with(&[z], lambdas))?;
        let acts: Vec<Vec<f64>> = (0..z.len()).map(|i| acts.row(i).to_vec()).collect();
        let q = forward_values(&critic.spec, &critic.params, rows_with(&[z, &acts], lambdas))?;
        let mut total = 0.0;
        for i in 0..z.len() {
            let pen = acts[i].iter().zip(&a[i]).map(|(x, y)| (x - y) * (x - y)).sum::<f64>() / acts[i].len() as f64;
            total += -lambdas[i] * k * q.data()[i] + (1.0 - lambdas[i]) * pen;
        }
        Ok(total / z.len() as f64)
    }
}
