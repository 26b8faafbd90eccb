//! λ-conditioned policy training through differentiable model rollouts.

mod policy;
mod rollout;
mod sampler;
mod train;

pub use policy::{Conditioning, LionPolicy};
pub use rollout::{
    compute_penalty, data_anchor_loss, lion_objective, normalize_reward, rollout_loss, sample_starts, AnchorBatch,
    Objective, ObjectiveJob, RolloutStart, REWARD_SCALE,
};
pub use sampler::{sample_lambda, LambdaSampler};
pub use train::{
    train_fixed_lambda, train_lion, train_lion_observed, ChunkedEngine, LionTrainConfig, LionTraining,
    TrainRecord,
};

#[cfg(test)]
mod tests;
