//! File formats, parallel training, the command line and the deployment
//! service around [`lion_core`].
//!
//! - [`checkpoint`]: the versioned binary format for every trained network.
//! - [`dataset_io`]: line-delimited JSON datasets.
//! - [`envs`]: the environment registry and TOML configs.
//! - [`reports`]: report records, plot-data files and their schema checks.
//! - [`threads`]: a scoped-thread [`Executor`](lion_core::exec::Executor).
//! - [`service`]: the HTTP/WebSocket session host.

pub mod checkpoint;
pub mod dataset_io;
pub mod envs;
mod error;
pub mod reports;
pub mod service;
pub mod threads;

pub use error::{Error, Result};
