//! Experiment harness: configuration, training and evaluation loops,
//! metrics, file formats and the `pime` command line.

pub mod cli;
pub mod compare;
pub mod config;
pub mod episode;
pub mod error;
pub mod evaluate;
pub mod io;
pub mod metrics;
pub mod train;

pub use config::ExperimentConfig;
pub use error::{HarnessError, Result};
