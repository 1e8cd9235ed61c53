//! Scenario laboratory on top of `gkdv-core`: TOML scenario files, run
//! orchestration and persistence, the identity battery and parallel sweeps.

pub mod config;
pub mod error;
pub mod persist;
pub mod run;
pub mod sweep;
pub mod verify;

pub use config::{load_config, parse_config, Monitor, Recipe, ScenarioConfig};
pub use error::{ConfigError, LabError, LabResult};
pub use run::{analyze, report, run_scenario, Check, RunReport, ScenarioRun};
pub use sweep::sweep;
pub use verify::{verify_suite, verify_with, VerifyOptions, VerifyReport};
