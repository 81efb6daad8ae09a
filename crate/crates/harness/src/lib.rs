//! Config-driven sweeps over the simmap engines, CSV output and power-law fits.

pub mod cli;
pub mod config;
pub mod experiments;
pub mod fit;
pub mod table;

pub use config::{load_config, parse_config, ExperimentConfig, ExperimentKind};
pub use experiments::{run_experiment, Output, RunError};
pub use fit::{fit_power_law, FitResult};
pub use table::{write_results, SweepRow};
