//! Scenario files, sweeps and validation on top of `mdirand`.

pub mod commands;
pub mod error;
pub mod format;
pub mod scenario_file;

pub use commands::{cmd_rate, cmd_sweep, cmd_validate, validate_file, Check, Outcome, RateRecord, SweepSpec, CSV_HEADER};
pub use error::{CliError, Result};
pub use scenario_file::{ScenarioFile, SweepParam};
