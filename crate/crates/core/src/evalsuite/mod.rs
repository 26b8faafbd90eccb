//! λ-sweeps, the stepwise operator strategy, baselines and ablations.

mod ablation;
mod baselines;
mod eval;
mod pipeline;
mod report;
mod stats;
mod strategy;
mod td3bc;

pub use ablation::{
    aggregation_report, beta_configs, beta_report, dataset_action_mse, eta_configs, eta_report, score, sorted_unique,
    train_aggregation, train_settings, unique_modes, AggregationReport,
};
pub use baselines::{
    adjacency, conditioning_variation, discrete_collection_report, return_conditioned_report, train_discrete_collection,
    train_return_conditioned, RvsConfig, RvsPolicy,
};
pub use eval::{
    behavior_distance, distance_states, evaluate_controller, evaluate_policy, lambda_grid, lambda_sweep,
    mean_action_distance, mean_stderr, Evaluation, LambdaSweepResult, SweepConfig,
};
pub use pipeline::{assemble_ensemble, collect_2d, train_ensemble, train_models, Artifacts, PipelineConfig};
pub use report::{AblationKind, AblationReport, Adjacency, BaselineMethod, BaselineReport, Finding, SettingScore};
pub use stats::{average_ranks, ks_critical_01, ks_uniform, pearson, spearman};
pub use strategy::{user_strategy, user_strategy_env, user_strategy_on_sweep, StopReason, StrategyResult};
pub use td3bc::{
    actor_loss_and_grad, critic_targets, lambda_td3bc_report, train_lambda_td3bc, Critic, Td3Record, Td3Training,
    Td3bcConfig,
};
