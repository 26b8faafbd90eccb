use alloc::string::String;
use alloc::vec::Vec;

use super::Environment;
use crate::data::{Dataset, Trajectory, TrajectoryMeta, Transition};
use crate::rng::{seeded, Rng};

/// Rolls out `policy` from uniform random starts until exactly `n_interactions`
/// transitions are stored; the last episode may be truncated.
///
/// `policy` receives the observation and the collection RNG, so the whole
/// dataset is a function of `seed`.
pub fn collect_dataset<E, P>(
    env: &E,
    mut policy: P,
    n_interactions: usize,
    seed: u64,
    policy_name: &str,
    explore_eps: f64,
) -> Dataset
where
    E: Environment,
    P: FnMut(&[f64], &mut Rng) -> Vec<f64>,
{
    assert!(n_interactions > 0, "n_interactions must be positive");
    let mut rng = seeded(seed);
    let mut trajectories = Vec::new();
    let mut remaining = n_interactions;
    let mut episode_id = 0;
    while remaining > 0 {
        let mut state = env.sample_start(&mut rng);
        let steps = env.episode_length().min(remaining);
        let mut transitions = Vec::with_capacity(steps);
        for _ in 0..steps {
            let obs = env.observe(&state);
            let action: Vec<f64> = policy(&obs, &mut rng).iter().map(|a| a.clamp(-1.0, 1.0)).collect();
            let (next, reward) = env.step(&state, &action);
            transitions.push(Transition {
                state: obs,
                action,
                reward,
                next_state: env.observe(&next),
            });
            state = next;
        }
        remaining -= steps;
        trajectories.push(Trajectory {
            episode_id,
            transitions,
            meta: TrajectoryMeta {
                policy: String::from(policy_name),
                explore_eps,
                seed,
            },
        });
        episode_id += 1;
    }
    Dataset {
        state_dim: env.observation_dim(),
        action_dim: env.action_dim(),
        trajectories,
    }
}
