//! Experiment harness for the immersed-inclusion elasticity solver:
//! configuration, inclusion layouts, mesh construction and the studies
//! behind the `rlm` command-line tool.

pub mod config;
pub mod error;
pub mod pipeline;
pub mod placement;
pub mod run;
pub mod studies;

pub use config::ExperimentConfig;
pub use error::{ExpError, ExpResult};
pub use run::{run_experiment, Command, ModuliStats, RunOutput};
