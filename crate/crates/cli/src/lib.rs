//! Pipeline orchestration behind the `hhl-depth` command.

pub mod commands;
pub mod config;
pub mod error;
pub mod study;

pub use commands::{run, Cli};
pub use config::PipelineConfig;
pub use error::CliError;
