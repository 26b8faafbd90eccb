//! Supervised components trained before policy optimization.

mod behavior;
mod dynamics;
mod ensemble;

pub use behavior::{train_behavior, BehaviorConfig, BehaviorNet, BehaviorTraining};
pub use dynamics::{
    open_loop_rmse, recurrent_window_loss, train_dynamics_member, train_dynamics_recurrent, DynamicsConfig,
    DynamicsMember, MemberTraining, RecurrentConfig, WindowLoss,
};
pub use ensemble::{aggregate, Aggregation, BoundEnsemble, DynamicsEnsemble, EnsembleContext, Prediction, TapedPrediction};

use alloc::vec::Vec;
use rand::seq::SliceRandom;

use crate::rng::Rng;

/// Shuffled index batches covering `0..n` once.
pub(crate) fn minibatches(n: usize, batch_size: usize, rng: &mut Rng) -> Vec<Vec<usize>> {
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(rng);
    idx.chunks(batch_size.max(1)).map(<[usize]>::to_vec).collect()
}
