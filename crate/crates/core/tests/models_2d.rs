use lion_core::data::{compute_norm_stats, split, Dataset};
use lion_core::envs::{
    baseline_policy_2d, collect_dataset, Env2DConfig, GoalPolicyConfig, PartialObsConfig, PartialObsWorld, World2D,
};
use lion_core::models::{
    open_loop_rmse, train_behavior, train_dynamics_member, train_dynamics_recurrent, BehaviorConfig, DynamicsConfig,
    RecurrentConfig,
};
use lion_core::rng::uniform;

fn world_dataset(eps: f64, n: usize, seed: u64) -> Dataset {
    let cfg = GoalPolicyConfig {
        explore_eps: eps,
        ..Default::default()
    };
    collect_dataset(
        &World2D::default(),
        |s, rng| baseline_policy_2d([s[0], s[1]], &cfg, rng).to_vec(),
        n,
        seed,
        "baseline",
        eps,
    )
}

fn po_dataset(momentum: f64, n: usize, seed: u64) -> Dataset {
    let env = PartialObsWorld::new(PartialObsConfig {
        hidden_momentum: momentum,
        base: Env2DConfig {
            step_scale: 0.2,
            episode_length: 30,
            ..Default::default()
        },
    });
    collect_dataset(
        &env,
        |_, rng| vec![uniform(rng, -1.0, 1.0), uniform(rng, -1.0, 1.0)],
        n,
        seed,
        "uniform",
        1.0,
    )
}

#[test]
fn one_step_model_learns_2d_dynamics() {
    let data = world_dataset(0.1, 1000, 11);
    let (train, val) = split(&data, 0.9, 0).unwrap();
    let norm = compute_norm_stats(&train).unwrap();
    let t = train_dynamics_member(&train, &val, &norm, &DynamicsConfig::default(), 1).unwrap();
    let rmse = open_loop_rmse(&t.member, &val, &norm, 0, 1).unwrap();
    assert!(rmse < 0.05, "rmse {rmse}");
}

#[test]
fn clone_matches_greedy_policy_without_exploration() {
    let data = world_dataset(0.0, 1000, 12);
    let clone = train_behavior(&data, &BehaviorConfig::default(), 2).unwrap();
    let policy = GoalPolicyConfig::default();
    let mut abs = 0.0;
    let mut count = 0;
    for t in data.transitions() {
        let a = clone.net.act(&t.state);
        let g = policy.greedy_action([t.state[0], t.state[1]]);
        abs += (a[0] - g[0]).abs() + (a[1] - g[1]).abs();
        count += 2;
    }
    let mae = abs / count as f64;
    assert!(mae < 0.05, "mae {mae}");
}

#[test]
fn clone_generalizes_to_held_out_states() {
    let train = world_dataset(0.0, 3000, 13);
    let held = world_dataset(0.0, 1000, 14);
    let clone = train_behavior(&train, &BehaviorConfig::default(), 3).unwrap();
    let policy = GoalPolicyConfig::default();
    let mut sq = 0.0;
    let mut count = 0;
    for t in held.transitions() {
        let a = clone.net.act(&t.state);
        let g = policy.greedy_action([t.state[0], t.state[1]]);
        sq += (a[0] - g[0]).powi(2) + (a[1] - g[1]).powi(2);
        count += 2;
    }
    let mse = sq / count as f64;
    assert!(mse < 1e-2, "mse {mse}");
}

fn recurrent_vs_feedforward(momentum: f64) -> (f64, f64) {
    let (history, window) = (10, 10);
    let data = po_dataset(momentum, 3000, 21);
    let (train, val) = split(&data, 0.9, 0).unwrap();
    let norm = compute_norm_stats(&train).unwrap();
    let ff = train_dynamics_member(&train, &val, &norm, &DynamicsConfig::default(), 1).unwrap();
    let cfg = DynamicsConfig {
        epochs: 150,
        patience: Some(30),
        recurrent: Some(RecurrentConfig {
            cell_size: 30,
            history,
            window,
            stride: 2,
        }),
        ..Default::default()
    };
    let rec = train_dynamics_recurrent(&train, &val, &norm, &cfg, 1).unwrap();
    (
        open_loop_rmse(&rec.member, &val, &norm, history, window).unwrap(),
        open_loop_rmse(&ff.member, &val, &norm, history, window).unwrap(),
    )
}

#[test]
fn recurrent_member_matches_feedforward_when_memoryless() {
    let (rec, ff) = recurrent_vs_feedforward(0.0);
    assert!(rec < 2.0 * ff, "recurrent {rec} feedforward {ff}");
}

#[test]
fn recurrent_member_infers_hidden_velocity() {
    let (rec, ff) = recurrent_vs_feedforward(0.8);
    assert!(rec < ff, "recurrent {rec} feedforward {ff}");
}
