//! File-driven scenario runner: `simulate`, `verify` and `sweep`.

pub mod config;
pub mod error;
pub mod run;

pub use config::{load_config, parse_config, Scenario, ScenarioConfig};
pub use error::CliError;
pub use run::{run_scenario, simulate, sweep, verify, RunOutput, Summary};

/// Overrides the output directory of every run.
pub const OUTPUT_DIR_ENV: &str = "GCS_OUTPUT_DIR";
