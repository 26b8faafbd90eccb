use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch at {layer}: expected {expected}, found {found}")]
    DimensionMismatch {
        layer: String,
        expected: usize,
        found: usize,
    },
    #[error("loss must be a 1x1 node, found {rows}x{cols}")]
    NonScalarLoss { rows: usize, cols: usize },
    #[error("non-finite gradient at parameter index {index}")]
    NonFiniteGradient { index: usize },
    #[error("non-finite parameter at index {index}")]
    NonFiniteParameter { index: usize },
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("split needs at least two trajectories, found {0}")]
    TooFewTrajectories(usize),
    #[error("trajectory {episode} has {len} transitions, need at least {needed}")]
    TrajectoryTooShort {
        episode: u64,
        len: usize,
        needed: usize,
    },
    #[error("training diverged at epoch {epoch} (loss {loss})")]
    Divergence { epoch: usize, loss: f64 },
    #[error("non-finite value in rollout at step {step}")]
    NonFiniteRollout { step: usize },
    #[error("lambda {0} outside [0, 1]")]
    LambdaOutOfRange(f64),
    #[error("degenerate reward range [{min}, {max}]")]
    DegenerateRewardRange { min: f64, max: f64 },
    #[error("invalid dataset: {0}")]
    InvalidDataset(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}
