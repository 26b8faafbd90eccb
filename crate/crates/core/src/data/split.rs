use alloc::vec::Vec;
use rand::seq::SliceRandom;

use super::Dataset;
use crate::math;
use crate::rng::seeded;
use crate::{Error, Result};

/// Trajectory-level random partition into `(train, val)`; `ratio` is the train share.
pub fn split(dataset: &Dataset, ratio: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::InvalidConfig("split ratio must be in (0, 1)".into()));
    }
    let n = dataset.trajectories.len();
    if n < 2 {
        return Err(Error::TooFewTrajectories(n));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut seeded(seed));
    let n_train = (math::round(ratio * n as f64) as usize).clamp(1, n - 1);
    let (train_idx, val_idx) = order.split_at(n_train);
    let pick = |idx: &[usize]| {
        let mut idx = idx.to_vec();
        idx.sort_unstable();
        Dataset {
            state_dim: dataset.state_dim,
            action_dim: dataset.action_dim,
            trajectories: idx.iter().map(|&i| dataset.trajectories[i].clone()).collect(),
        }
    };
    Ok((pick(train_idx), pick(val_idx)))
}
