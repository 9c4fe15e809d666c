//! Off-grid angles estimated with the on-grid and the Taylor-expanded dictionary.

use thz_bgsr::dictionary::DictionaryMode;
use thz_bgsr::estimators::Algorithm;
use thz_bgsr::harness::{run_point, SweepSpec, TrialOptions};
use thz_bgsr::metrics::to_db;
use thz_bgsr::{AngleMode, ScenarioConfig};

fn main() -> thz_bgsr::Result<()> {
    let trials = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(10);
    let options = TrialOptions { ber: false, bcrb: false };
    for snr in [10.0, 20.0] {
        let cfg = ScenarioConfig { angle_mode: AngleMode::OffGrid, ..ScenarioConfig::desk().with_snr_db(snr) };
        for mode in [DictionaryMode::OnGrid, DictionaryMode::Tbod] {
            let sweep = SweepSpec {
                trials,
                algorithms: vec![Algorithm::Bgsr, Algorithm::Gsmp],
                dictionary_mode: mode,
                ..Default::default()
            };
            let t = run_point(&cfg, &sweep, options, 1)?;
            let mean = |a| to_db(t.iter().map(|x| x.get(a).unwrap().nmse.unwrap()).sum::<f64>() / t.len() as f64);
            println!(
                "{snr:4.0} dB {mode:?}: bgsr {:.2} dB, gsmp {:.2} dB",
                mean(Algorithm::Bgsr),
                mean(Algorithm::Gsmp)
            );
        }
    }
    Ok(())
}
