//! BGSR error against ADC resolution.

use thz_bgsr::estimators::Algorithm;
use thz_bgsr::harness::{run_point, SweepSpec, TrialOptions};
use thz_bgsr::metrics::to_db;
use thz_bgsr::{AdcBits, ScenarioConfig};

fn main() -> thz_bgsr::Result<()> {
    let trials = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(10);
    let sweep = SweepSpec { trials, algorithms: vec![Algorithm::Bgsr], ..Default::default() };
    for bits in [AdcBits::Finite(1), AdcBits::Finite(2), AdcBits::Finite(3), AdcBits::Finite(4), AdcBits::Infinite] {
        let cfg = ScenarioConfig { adc_bits: bits, ..ScenarioConfig::desk().with_snr_db(10.0) };
        let t = run_point(&cfg, &sweep, TrialOptions { ber: false, bcrb: false }, 1)?;
        let m = t.iter().map(|x| x.get(Algorithm::Bgsr).unwrap().nmse.unwrap()).sum::<f64>() / t.len() as f64;
        println!("{:>4}: {:.2} dB", bits.to_string(), to_db(m));
    }
    Ok(())
}
