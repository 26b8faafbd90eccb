use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use super::minibatches;
use crate::data::{compute_norm_stats, Dataset, NormStats};
use crate::diffcore::{adam_update, mlp_mse_loss_and_grad, AdamState, Matrix, NetworkSpec, OutputActivation, ParamVector};
use crate::rng::seeded;
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BehaviorConfig {
    pub hidden: Vec<usize>,
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub lr_decay: f64,
}

impl Default for BehaviorConfig {
    fn default() -> Self {
        Self {
            hidden: alloc::vec![30],
            epochs: 2000,
            batch_size: 16,
            learning_rate: 1e-2,
            lr_decay: 0.998,
        }
    }
}

/// Deterministic clone of the data-generating policy.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BehaviorNet {
    pub spec: NetworkSpec,
    pub params: ParamVector,
    pub norm: NormStats,
}

impl BehaviorNet {
    pub fn act(&self, state: &[f64]) -> Vec<f64> {
        self.act_normalized(&self.norm.normalize(state))
    }

    /// Network output clipped to the action box `[-1, 1]^D`.
    pub fn act_normalized(&self, z: &[f64]) -> Vec<f64> {
        let mut a = self.spec.forward(&self.params, z, None).expect("behavior net dimensions").0;
        a.iter_mut().for_each(|x| *x = x.clamp(-1.0, 1.0));
        a
    }
}

#[derive(Clone, Debug)]
pub struct BehaviorTraining {
    pub net: BehaviorNet,
    /// Full-dataset MSE after each epoch.
    pub losses: Vec<f64>,
}

impl BehaviorTraining {
    pub fn final_mse(&self) -> f64 {
        self.losses.last().copied().unwrap_or(f64::NAN)
    }
}

/// Regresses dataset actions on normalized states over the whole dataset.
pub fn train_behavior(dataset: &Dataset, cfg: &BehaviorConfig, seed: u64) -> Result<BehaviorTraining> {
    let norm = compute_norm_stats(dataset)?;
    let states: Vec<Vec<f64>> = dataset.transitions().map(|t| norm.normalize(&t.state)).collect();
    let actions: Vec<Vec<f64>> = dataset.transitions().map(|t| t.action.clone()).collect();
    let spec = NetworkSpec::mlp(dataset.state_dim, &cfg.hidden, dataset.action_dim, OutputActivation::Identity);
    spec.validate()?;
    let mut rng = seeded(seed);
    let mut params = spec.init(&mut rng);
    let mut adam = AdamState::new(params.len(), cfg.learning_rate, cfg.lr_decay);
    let all_x = Matrix::from_rows(&states);
    let all_y = Matrix::from_rows(&actions);
    let mut losses = Vec::with_capacity(cfg.epochs);
    for epoch in 0..cfg.epochs {
        for batch in minibatches(states.len(), cfg.batch_size, &mut rng) {
            let x = Matrix::from_rows(&batch.iter().map(|&i| &states[i][..]).collect::<Vec<_>>());
            let y = Matrix::from_rows(&batch.iter().map(|&i| &actions[i][..]).collect::<Vec<_>>());
            let (loss, grad) = mlp_mse_loss_and_grad(&spec, &params, &x, &y)?;
            if !loss.is_finite() {
                return Err(Error::Divergence { epoch, loss });
            }
            adam_update(&mut params, &grad, &mut adam).map_err(|_| Error::Divergence { epoch, loss })?;
        }
        adam.end_epoch();
        let (loss, _) = mlp_mse_loss_and_grad(&spec, &params, &all_x, &all_y)?;
        if !loss.is_finite() {
            return Err(Error::Divergence { epoch, loss });
        }
        losses.push(loss);
    }
    Ok(BehaviorTraining {
        net: BehaviorNet { spec, params, norm },
        losses,
    })
}
