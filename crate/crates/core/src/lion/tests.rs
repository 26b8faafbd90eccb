use alloc::vec;
use alloc::vec::Vec;
use proptest::prelude::*;

use super::*;
use crate::data::{Dataset, NormStats, Trajectory, TrajectoryMeta, Transition};
use crate::diffcore::{finite_diff_check, NetworkSpec, OutputActivation, ParamVector};
use crate::models::{Aggregation, BehaviorNet, DynamicsEnsemble, DynamicsMember};
use crate::rng::{seeded, uniform, Rng};

fn norm2() -> NormStats {
    NormStats {
        state_mean: vec![5.0, 4.0],
        state_std: vec![2.5, 3.0],
        reward_min: 0.0,
        reward_max: 0.07,
        floored_dims: vec![],
    }
}

fn ensemble(n: usize, mode: Aggregation, rng: &mut Rng) -> DynamicsEnsemble {
    let spec = NetworkSpec::mlp(4, &[10, 6], 3, OutputActivation::Identity);
    let members = (0..n)
        .map(|_| DynamicsMember {
            params: spec.init(rng),
            spec: spec.clone(),
        })
        .collect();
    DynamicsEnsemble::new(members, mode, norm2(), 2).unwrap()
}

fn behavior(rng: &mut Rng) -> BehaviorNet {
    let spec = NetworkSpec::mlp(2, &[8], 2, OutputActivation::Identity);
    let mut norm = norm2();
    norm.state_mean = vec![4.5, 5.5];
    BehaviorNet {
        params: spec.init(rng),
        spec,
        norm,
    }
}

fn starts(n: usize, rng: &mut Rng) -> Vec<RolloutStart> {
    (0..n)
        .map(|_| RolloutStart::new(vec![uniform(rng, 0.0, 10.0), uniform(rng, 0.0, 10.0)]))
        .collect()
}

fn short_cfg(horizon: usize) -> LionTrainConfig {
    LionTrainConfig {
        horizon,
        hidden: vec![12, 12],
        ..Default::default()
    }
}

struct Setup {
    policy: LionPolicy,
    ensemble: DynamicsEnsemble,
    behavior: BehaviorNet,
    starts: Vec<RolloutStart>,
}

fn setup(seed: u64, mode: Aggregation, horizon: usize) -> Setup {
    let mut rng = seeded(seed);
    let cfg = short_cfg(horizon);
    Setup {
        policy: LionPolicy::init(&norm2(), 2, &cfg.hidden, Conditioning::Input, &mut rng),
        ensemble: ensemble(4, mode, &mut rng),
        behavior: behavior(&mut rng),
        starts: starts(5, &mut rng),
    }
}

fn loss(s: &Setup, lambdas: &[f64], horizon: usize) -> f64 {
    rollout_loss(&s.policy, &s.ensemble, &s.behavior, &s.starts, lambdas, &short_cfg(horizon), &mut seeded(77)).unwrap()
}

/// Offset and length of the reward column in a member's output layer.
fn reward_head(member: &DynamicsMember) -> (Vec<usize>, usize) {
    let last = member.spec.hidden_layers.len();
    let (w_off, w) = member.params.offset_of(&alloc::format!("layer{last}.weight")).unwrap();
    let (b_off, b) = member.params.offset_of(&alloc::format!("layer{last}.bias")).unwrap();
    let out = w.cols;
    let weights = (0..w.rows).map(|r| w_off + r * out + out - 1).collect();
    (weights, b_off + b.cols - 1)
}

fn perturb_reward_heads(e: &mut DynamicsEnsemble, rng: &mut Rng) {
    for m in &mut e.members {
        let (ws, b) = reward_head(m);
        for i in ws.into_iter().chain([b]) {
            m.params.values[i] += uniform(rng, -2.0, 2.0);
        }
    }
}

/// `r ↦ c·r + δ` on every member, which keeps the member ordering.
fn rescale_reward_heads(e: &mut DynamicsEnsemble, c: f64, delta: f64) {
    for m in &mut e.members {
        let (ws, b) = reward_head(m);
        for i in ws {
            m.params.values[i] *= c;
        }
        m.params.values[b] = c * m.params.values[b] + delta;
    }
}

#[test]
fn penalty_examples() {
    assert_eq!(compute_penalty(&[0.3, -0.2], &[0.3, -0.2]), 0.0);
    assert_eq!(compute_penalty(&[1.0, 1.0], &[-1.0, -1.0]), 4.0);
    assert!((compute_penalty(&[0.5], &[0.1]) - 0.16).abs() < 1e-15);
}

#[test]
fn reward_normalization_examples() {
    let n = norm2();
    assert_eq!(normalize_reward(0.0, &n).unwrap(), 0.0);
    assert!((normalize_reward(0.07, &n).unwrap() - 4.0).abs() < 1e-12);
    assert!((normalize_reward(0.035, &n).unwrap() - 2.0).abs() < 1e-12);
    assert!(normalize_reward(0.08, &n).unwrap() > 4.0);
    let mut flat = n.clone();
    flat.reward_max = flat.reward_min;
    assert!(matches!(normalize_reward(0.0, &flat), Err(crate::Error::DegenerateRewardRange { .. })));
}

proptest! {
    #[test]
    fn reward_normalization_is_monotone(a in -1.0f64..1.0, b in -1.0f64..1.0) {
        prop_assume!(a < b);
        let n = norm2();
        prop_assert!(normalize_reward(a, &n).unwrap() < normalize_reward(b, &n).unwrap());
    }

    #[test]
    fn lambda_zero_ignores_rewards(seed in 0u64..200, mode_idx in 0usize..2) {
        let mode = [Aggregation::Mean, Aggregation::Single][mode_idx];
        let mut s = setup(seed, mode, 6);
        let zeros = vec![0.0; s.starts.len()];
        let before = loss(&s, &zeros, 6);
        perturb_reward_heads(&mut s.ensemble, &mut seeded(seed + 1));
        prop_assert_eq!(before, loss(&s, &zeros, 6));
    }

    #[test]
    fn lambda_zero_ignores_reward_scale_under_min(seed in 0u64..200, c in 0.1f64..10.0, delta in -3.0f64..3.0) {
        let mut s = setup(seed, Aggregation::Min, 6);
        let zeros = vec![0.0; s.starts.len()];
        let before = loss(&s, &zeros, 6);
        rescale_reward_heads(&mut s.ensemble, c, delta);
        prop_assert_eq!(before, loss(&s, &zeros, 6));
    }

    #[test]
    fn lambda_one_ignores_behavior(seed in 0u64..200, mode_idx in 0usize..3) {
        let mut s = setup(seed, Aggregation::ALL[mode_idx], 6);
        let ones = vec![1.0; s.starts.len()];
        let before = loss(&s, &ones, 6);
        let mut rng = seeded(seed + 3);
        s.behavior.params.values.iter_mut().for_each(|v| *v += uniform(&mut rng, -1.0, 1.0));
        prop_assert_eq!(before, loss(&s, &ones, 6));
    }
}

#[test]
fn boundary_losses_match_their_single_terms() {
    let s = setup(4, Aggregation::Min, 5);
    let cfg = short_cfg(5);
    let zeros = vec![0.0; s.starts.len()];
    let ones = vec![1.0; s.starts.len()];
    let mut penalty = 0.0;
    let mut reward = 0.0;
    let mut rng = seeded(0);
    for start in &s.starts {
        let mut ctx = s.ensemble.context();
        let mut st = start.state.clone();
        let mut discount = 1.0;
        for _ in 0..cfg.horizon {
            let a = s.policy.act(&st, 0.0).unwrap();
            penalty += discount * compute_penalty(&s.behavior.act(&st), &a);
            let p = s.ensemble.predict(&mut ctx, &st, &a, &mut rng).unwrap();
            st = p.next_state;
            discount *= cfg.gamma;
        }
    }
    for start in &s.starts {
        let mut ctx = s.ensemble.context();
        let mut st = start.state.clone();
        let mut discount = 1.0;
        for _ in 0..cfg.horizon {
            let a = s.policy.act(&st, 1.0).unwrap();
            let p = s.ensemble.predict(&mut ctx, &st, &a, &mut rng).unwrap();
            reward += discount * normalize_reward(p.reward, &s.ensemble.norm).unwrap();
            st = p.next_state;
            discount *= cfg.gamma;
        }
    }
    let l0 = loss(&s, &zeros, 5);
    let l1 = loss(&s, &ones, 5);
    assert!((l0 - penalty).abs() < 1e-9 * penalty.abs().max(1.0), "{l0} vs {penalty}");
    assert!((l1 + reward).abs() < 1e-9 * reward.abs().max(1.0), "{l1} vs {reward}");
}

fn set_values(spec: &NetworkSpec, values: Vec<f64>) -> ParamVector {
    let mut p = spec.init(&mut seeded(0));
    assert_eq!(p.values.len(), values.len());
    p.values = values;
    p
}

#[test]
fn one_step_loss_matches_hand_evaluation() {
    let norm = NormStats {
        state_mean: vec![1.0],
        state_std: vec![2.0],
        reward_min: -1.0,
        reward_max: 1.0,
        floored_dims: vec![],
    };
    let pspec = NetworkSpec::mlp(2, &[], 1, OutputActivation::Tanh);
    let policy = LionPolicy {
        params: set_values(&pspec, vec![0.7, -0.4, 0.1]),
        spec: pspec,
        norm: norm.clone(),
        conditioning: Conditioning::Input,
    };
    let bspec = NetworkSpec::mlp(1, &[], 1, OutputActivation::Identity);
    let behavior = BehaviorNet {
        params: set_values(&bspec, vec![0.5, -0.2]),
        spec: bspec,
        norm: norm.clone(),
    };
    let mspec = NetworkSpec::mlp(2, &[], 2, OutputActivation::Identity);
    // Weights are [in, out]: rows (z, a), columns (Δz, reward).
    let member = DynamicsMember {
        params: set_values(&mspec, vec![0.1, 0.3, -0.2, 0.6, 0.05, 0.2]),
        spec: mspec,
    };
    let ens = DynamicsEnsemble::new(vec![member], Aggregation::Min, norm, 1).unwrap();
    let (s, lam) = (3.0, 0.25);
    let z: f64 = (s - 1.0) / 2.0;
    let a = (0.7 * z - 0.4 * lam + 0.1).tanh();
    let b = 0.5 * z - 0.2;
    let r_unit = 0.3 * z + 0.6 * a + 0.2;
    let e = 4.0 * r_unit;
    let p = (b - a) * (b - a);
    let expected = -(lam * e - (1.0 - lam) * p);
    let got = rollout_loss(&policy, &ens, &behavior, &[RolloutStart::new(vec![s])], &[lam], &short_cfg(1), &mut seeded(0)).unwrap();
    assert!((got - expected).abs() < 1e-10, "{got} vs {expected}");
}

#[test]
fn anchor_examples() {
    let norm = NormStats {
        state_mean: vec![0.0],
        state_std: vec![1.0],
        reward_min: 0.0,
        reward_max: 1.0,
        floored_dims: vec![],
    };
    let spec = NetworkSpec::mlp(2, &[], 1, OutputActivation::Tanh);
    let policy = LionPolicy {
        params: set_values(&spec, vec![0.0, 0.0, 0.0]),
        spec,
        norm,
        conditioning: Conditioning::Input,
    };
    let batch = AnchorBatch {
        states: vec![vec![0.3]],
        actions: vec![vec![0.4]],
    };
    assert!((data_anchor_loss(&policy, &batch).unwrap() - 0.16).abs() < 1e-15);
    let reproduced = AnchorBatch {
        states: vec![vec![0.3], vec![-1.0]],
        actions: vec![vec![0.0], vec![0.0]],
    };
    assert_eq!(data_anchor_loss(&policy, &reproduced).unwrap(), 0.0);
}

#[test]
fn zero_eta_drops_the_anchor_gradient() {
    let s = setup(9, Aggregation::Min, 4);
    let cfg = short_cfg(4);
    let lambdas = vec![0.2, 0.9, 0.0, 1.0, 0.5];
    let mut rng = seeded(1);
    let anchor = AnchorBatch {
        states: (0..8).map(|_| vec![uniform(&mut rng, 0.0, 10.0), uniform(&mut rng, 0.0, 10.0)]).collect(),
        actions: (0..8).map(|_| vec![uniform(&mut rng, -1.0, 1.0), uniform(&mut rng, -1.0, 1.0)]).collect(),
    };
    let with = lion_objective(&s.policy, &s.ensemble, &s.behavior, &s.starts, &lambdas, &anchor, 0.0, &cfg, &mut seeded(5)).unwrap();
    let without = lion_objective(&s.policy, &s.ensemble, &s.behavior, &s.starts, &lambdas, &AnchorBatch::default(), 0.0, &cfg, &mut seeded(5)).unwrap();
    assert_eq!(with.grad, without.grad);
    assert!(with.anchor_loss > 0.0);
}

#[test]
fn chunked_objective_equals_single_tape_sum() {
    let s = setup(13, Aggregation::Min, 5);
    let cfg = short_cfg(5);
    let lambdas = vec![0.3, 0.0, 1.0, 0.7, 0.05];
    let mut rng = seeded(2);
    let anchor = AnchorBatch {
        states: (0..6).map(|_| vec![uniform(&mut rng, 0.0, 10.0), uniform(&mut rng, 0.0, 10.0)]).collect(),
        actions: (0..6).map(|_| vec![uniform(&mut rng, -1.0, 1.0), uniform(&mut rng, -1.0, 1.0)]).collect(),
    };
    let job = ObjectiveJob {
        policy: &s.policy,
        ensemble: &s.ensemble,
        behavior: &s.behavior,
        starts: &s.starts,
        lambdas: &lambdas,
        anchor: &anchor,
        anchor_weight: 0.1,
        cfg: &cfg,
    };
    let whole = job.evaluate(&mut seeded(4)).unwrap();
    for chunks in [1, 2, 3, 5, 9] {
        let split = ChunkedEngine::new(&crate::exec::Serial, chunks).evaluate(&job, &mut seeded(4)).unwrap();
        assert!((split.value - whole.value).abs() < 1e-12);
        assert!((split.anchor_loss - whole.anchor_loss).abs() < 1e-15);
        for (a, b) in split.grad.iter().zip(&whole.grad) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}

fn objective_gradient_error(mode: Aggregation, seed: u64, horizon: usize) -> f64 {
    let s = setup(seed, mode, horizon);
    let cfg = short_cfg(horizon);
    let lambdas = vec![0.1, 0.8, 0.0, 1.0, 0.45];
    let mut rng = seeded(seed + 100);
    let anchor = AnchorBatch {
        states: (0..6).map(|_| vec![uniform(&mut rng, 0.0, 10.0), uniform(&mut rng, 0.0, 10.0)]).collect(),
        actions: (0..6).map(|_| vec![uniform(&mut rng, -1.0, 1.0), uniform(&mut rng, -1.0, 1.0)]).collect(),
    };
    finite_diff_check(&s.policy.params, 1e-5, |p| {
        let mut policy = s.policy.clone();
        policy.params = p.clone();
        let o = lion_objective(&policy, &s.ensemble, &s.behavior, &s.starts, &lambdas, &anchor, 0.1, &cfg, &mut seeded(3))?;
        Ok((o.value, o.grad))
    })
    .unwrap()
}

#[test]
fn objective_gradient_matches_finite_differences() {
    for (i, mode) in Aggregation::ALL.into_iter().enumerate() {
        for horizon in [1, 4, 10] {
            let err = objective_gradient_error(mode, 20 + i as u64, horizon);
            assert!(err < 1e-3, "{mode:?} H={horizon}: {err}");
        }
    }
}

fn toy_dataset(rng: &mut Rng) -> Dataset {
    let trajectories = (0..4)
        .map(|e| {
            let mut s = vec![uniform(rng, 0.0, 10.0), uniform(rng, 0.0, 10.0)];
            let transitions = (0..10)
                .map(|_| {
                    let a = vec![uniform(rng, -1.0, 1.0), uniform(rng, -1.0, 1.0)];
                    let next = vec![s[0] + 0.5 * a[0], s[1] + 0.5 * a[1]];
                    let t = Transition {
                        state: s.clone(),
                        action: a,
                        reward: uniform(rng, 0.0, 0.07),
                        next_state: next.clone(),
                    };
                    s = next;
                    t
                })
                .collect();
            Trajectory {
                episode_id: e,
                transitions,
                meta: TrajectoryMeta::default(),
            }
        })
        .collect();
    Dataset {
        state_dim: 2,
        action_dim: 2,
        trajectories,
    }
}

#[test]
fn zero_updates_returns_initialization() {
    let mut rng = seeded(6);
    let s = setup(6, Aggregation::Min, 3);
    let data = toy_dataset(&mut rng);
    let cfg = LionTrainConfig {
        updates: 0,
        ..short_cfg(3)
    };
    let t = train_lion(&data, &s.ensemble, &s.behavior, &cfg).unwrap();
    let mut init_rng = seeded(crate::rng::derive_seed(cfg.seed, 1));
    let init = LionPolicy::init(&s.ensemble.norm, 2, &cfg.hidden, Conditioning::Input, &mut init_rng);
    assert_eq!(t.policy, init);
    assert!(t.log.is_empty());
}

#[test]
fn training_leaves_frozen_models_untouched_and_is_deterministic() {
    let mut rng = seeded(7);
    let s = setup(7, Aggregation::Mean, 5);
    let data = toy_dataset(&mut rng);
    let (ens, beh) = (s.ensemble.clone(), s.behavior.clone());
    let cfg = LionTrainConfig {
        updates: 20,
        batch: 8,
        ..short_cfg(5)
    };
    let a = train_lion(&data, &s.ensemble, &s.behavior, &cfg).unwrap();
    let b = train_lion(&data, &s.ensemble, &s.behavior, &cfg).unwrap();
    assert_eq!(ens, s.ensemble);
    assert_eq!(beh, s.behavior);
    assert_eq!(a.policy, b.policy);
    assert_eq!(a.log, b.log);
    assert_eq!(a.log.len(), 20);
}

#[test]
fn fixed_lambda_training_rejects_out_of_range() {
    let mut rng = seeded(8);
    let s = setup(8, Aggregation::Min, 2);
    let data = toy_dataset(&mut rng);
    assert!(train_fixed_lambda(&data, &s.ensemble, &s.behavior, 1.5, &short_cfg(2), &crate::exec::Serial).is_err());
    let cfg = LionTrainConfig {
        updates: 3,
        batch: 4,
        ..short_cfg(2)
    };
    let t = train_fixed_lambda(&data, &s.ensemble, &s.behavior, 0.3, &cfg, &crate::exec::Serial).unwrap();
    assert_eq!(t.policy.conditioning, Conditioning::Fixed(0.3));
}

#[test]
fn invalid_config_is_rejected() {
    for cfg in [
        LionTrainConfig { gamma: 1.0, ..Default::default() },
        LionTrainConfig { horizon: 0, ..Default::default() },
        LionTrainConfig { eta: -0.1, ..Default::default() },
        LionTrainConfig { beta_a: 0.0, ..Default::default() },
    ] {
        assert!(cfg.validate().is_err());
    }
}

#[test]
fn lambda_batch_must_match_starts() {
    let s = setup(1, Aggregation::Min, 2);
    let r = rollout_loss(&s.policy, &s.ensemble, &s.behavior, &s.starts, &[0.5], &short_cfg(2), &mut seeded(0));
    assert!(r.is_err());
}
