use alloc::vec;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use super::Dataset;
use crate::math;
use crate::{Error, Result};

pub const STD_FLOOR: f64 = 1e-6;

/// Per-dimension state statistics (population convention) and the observed reward range.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormStats {
    pub state_mean: Vec<f64>,
    pub state_std: Vec<f64>,
    pub reward_min: f64,
    pub reward_max: f64,
    /// Dimensions whose standard deviation was raised to [`STD_FLOOR`].
    #[serde(default)]
    pub floored_dims: Vec<usize>,
}

pub fn compute_norm_stats(dataset: &Dataset) -> Result<NormStats> {
    let n = dataset.n_transitions();
    if n == 0 {
        return Err(Error::EmptyDataset);
    }
    let d = dataset.state_dim;
    let mut mean = vec![0.0; d];
    let (mut rmin, mut rmax) = (f64::INFINITY, f64::NEG_INFINITY);
    for t in dataset.transitions() {
        mean.iter_mut().zip(&t.state).for_each(|(m, s)| *m += s);
        rmin = rmin.min(t.reward);
        rmax = rmax.max(t.reward);
    }
    mean.iter_mut().for_each(|m| *m /= n as f64);
    let mut var = vec![0.0; d];
    for t in dataset.transitions() {
        for ((v, s), m) in var.iter_mut().zip(&t.state).zip(&mean) {
            *v += (s - m) * (s - m);
        }
    }
    let mut floored_dims = Vec::new();
    let std = var
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let s = math::sqrt(v / n as f64);
            if s < STD_FLOOR {
                floored_dims.push(i);
                STD_FLOOR
            } else {
                s
            }
        })
        .collect();
    Ok(NormStats {
        state_mean: mean,
        state_std: std,
        reward_min: rmin,
        reward_max: rmax,
        floored_dims,
    })
}

impl NormStats {
    pub fn state_dim(&self) -> usize {
        self.state_mean.len()
    }

    pub fn normalize(&self, state: &[f64]) -> Vec<f64> {
        state
            .iter()
            .zip(&self.state_mean)
            .zip(&self.state_std)
            .map(|((s, m), sd)| (s - m) / sd)
            .collect()
    }

    pub fn denormalize(&self, z: &[f64]) -> Vec<f64> {
        z.iter()
            .zip(&self.state_mean)
            .zip(&self.state_std)
            .map(|((z, m), sd)| z * sd + m)
            .collect()
    }

    /// Column scale/shift that maps raw states to normalized ones.
    pub fn normalizer(&self) -> (Vec<f64>, Vec<f64>) {
        let scale: Vec<f64> = self.state_std.iter().map(|s| 1.0 / s).collect();
        let shift = self.state_mean.iter().zip(&scale).map(|(m, s)| -m * s).collect();
        (scale, shift)
    }

    pub fn reward_range(&self) -> f64 {
        self.reward_max - self.reward_min
    }

    /// Reward rescaled to the unit interval over the dataset range; used as the
    /// dynamics models' reward target. A degenerate range maps everything to 0.
    pub fn reward_to_unit(&self, r: f64) -> f64 {
        let range = self.reward_range();
        if range > 0.0 {
            (r - self.reward_min) / range
        } else {
            0.0
        }
    }

    pub fn reward_from_unit(&self, z: f64) -> f64 {
        self.reward_min + z * self.reward_range()
    }
}
