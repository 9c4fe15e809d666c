//! Full sweep through the harness, summary CSV on stdout.

use thz_bgsr::harness::{run_sweep, write_csv, SweepSpec, TrialOptions};
use thz_bgsr::ScenarioConfig;

fn main() -> thz_bgsr::Result<()> {
    let sweep = SweepSpec { trials: 4, snr_db_list: vec![0.0, 10.0, 20.0], ..Default::default() };
    let result = run_sweep(&ScenarioConfig::desk(), &sweep, TrialOptions::default())?;
    eprintln!("config hash {}", result.config_hash);
    write_csv(&result.rows, std::io::stdout())
}
