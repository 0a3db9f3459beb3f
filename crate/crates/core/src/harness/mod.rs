//! Configuration, feasibility checks, experiment runs and reports.

pub mod config;
pub mod feasibility;
pub mod run;

pub use config::{parse_config, parse_config_with_warnings, ConfigError, ExperimentConfig, ExperimentKind};
pub use feasibility::{check_duration, check_feasibility, Feasibility};
pub use run::{resolve_out_dir, run, run_with_warnings, RunError, RunReport};
