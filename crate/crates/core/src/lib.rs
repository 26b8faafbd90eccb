//! Core algorithms for training a single offline policy whose proximity to
//! the data-generating behavior is chosen at runtime through a scalar `λ ∈ [0, 1]`.
//!
//! The crate is `no_std` (with `alloc`) and performs no IO. It contains:
//!
//! - [`diffcore`]: a small reverse-mode tape over dense matrices, feedforward and
//!   recurrent networks, Adam, and a finite-difference gradient checker.
//! - [`envs`]: the 2D reward-bump world, its goal-seeking data policy, and a
//!   partially observable momentum variant.
//! - [`data`]: trajectories, normalization statistics and splits.
//! - [`models`]: the behavior clone and the pessimistic dynamics ensemble.
//! - [`lion`]: the λ-conditioned policy and its rollout-based training loop.
//! - [`evalsuite`]: λ-sweeps, the stepwise operator strategy, baselines and ablations.
//!
//! File formats, the CLI and the deployment service live in the `lion` crate.

#![cfg_attr(not(any(feature = "std", test)), no_std)]

extern crate alloc;

pub mod data;
pub mod diffcore;
pub mod envs;
pub mod evalsuite;
pub mod exec;
pub mod lion;
pub mod models;

mod error;
pub mod math;
pub mod rng;

pub use error::{Error, Result};
