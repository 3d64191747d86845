//! Scenario configuration, execution and CSV output for the `ffspin` tool.

pub mod config;
pub mod error;
pub mod scenario;

pub use config::{Mode, ScenarioConfig, Sector};
pub use error::CliError;
pub use scenario::{run, RunSummary};
