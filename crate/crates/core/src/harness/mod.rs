//! Configuration loading, seeded Monte Carlo sweeps and the CLI.

pub mod cli;
pub mod spec;
pub mod sweep;
pub mod trial;

pub use cli::run_cli;
pub use spec::{load_config, parse_config, LoadedConfig, SweepAxis, SweepSpec};
pub use sweep::{aggregate, config_hash, mean_stderr, run_point, run_sweep, write_csv, write_csv_file, ResultRow, SweepResult};
pub use trial::{draw_trial, run_trial, trial_rng, Stream, TrialData, TrialOptions, TrialOutcome};
