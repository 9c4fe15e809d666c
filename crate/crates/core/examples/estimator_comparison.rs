//! BGSR, GSMP, per-subcarrier OMP and per-subcarrier SBL on the same trials.

use thz_bgsr::estimators::Algorithm;
use thz_bgsr::harness::{run_point, SweepSpec, TrialOptions};
use thz_bgsr::metrics::to_db;
use thz_bgsr::ScenarioConfig;

fn main() -> thz_bgsr::Result<()> {
    let trials = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(10);
    let sweep = SweepSpec { trials, algorithms: Algorithm::ALL[..4].to_vec(), ..Default::default() };
    let options = TrialOptions { ber: false, bcrb: false };
    println!("{:>6} {:>9} {:>9} {:>9} {:>9}", "SNR", "bgsr", "gsmp", "omp", "sbl");
    for snr in [0.0, 5.0, 10.0, 15.0] {
        let t = run_point(&ScenarioConfig::desk().with_snr_db(snr), &sweep, options, 1)?;
        let cols: Vec<String> = sweep
            .algorithms
            .iter()
            .map(|&a| {
                let m = t.iter().map(|x| x.get(a).unwrap().nmse.unwrap()).sum::<f64>() / t.len() as f64;
                format!("{:9.2}", to_db(m))
            })
            .collect();
        println!("{snr:6.1} {}", cols.join(" "));
    }
    Ok(())
}
