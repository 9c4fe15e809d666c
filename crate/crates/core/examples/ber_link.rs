//! Uncoded PSK over the estimated channels with an MMSE receiver.

use thz_bgsr::estimators::Algorithm;
use thz_bgsr::harness::{run_point, SweepSpec, TrialOptions};
use thz_bgsr::ScenarioConfig;

fn main() -> thz_bgsr::Result<()> {
    let trials = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(10);
    let algs = vec![Algorithm::Genie, Algorithm::Bgsr, Algorithm::Gsmp, Algorithm::Omp];
    for order in [4, 8] {
        println!("{order}-PSK");
        for snr in [0.0, 5.0, 10.0] {
            let cfg = ScenarioConfig { constellation: order, ..ScenarioConfig::desk().with_snr_db(snr) };
            let sweep = SweepSpec { trials, algorithms: algs.clone(), ..Default::default() };
            let t = run_point(&cfg, &sweep, TrialOptions { ber: true, bcrb: false }, 1)?;
            let line: Vec<String> = algs
                .iter()
                .map(|&a| {
                    let (e, b) = t.iter().fold((0, 0), |(e, b), x| {
                        let c = x.get(a).unwrap().ber;
                        (e + c.errors, b + c.bits)
                    });
                    format!("{a} {:.4}", e as f64 / b as f64)
                })
                .collect();
            println!("  {snr:4.0} dB  {}", line.join("  "));
        }
    }
    Ok(())
}
