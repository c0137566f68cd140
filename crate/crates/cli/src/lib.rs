//! Experiment layer over `singlet-core`: configuration, presets, parallel
//! sweeps and CSV/JSON output.

pub mod config;
pub mod emit;
pub mod presets;
pub mod runner;

pub use config::{ConfigError, ExperimentSpec, InitialState, KSpread, Overrides};
pub use emit::{emit, render, Format, CSV_HEADER};
pub use runner::{run_all, run_experiment, ResultRow, RunReport};
