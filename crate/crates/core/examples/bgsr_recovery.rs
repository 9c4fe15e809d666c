//! Runs BGSR on one desk trial and prints the EM trace.

use thz_bgsr::channel::Environment;
use thz_bgsr::dictionary::{DictionaryMode, SparsifyingDictionary};
use thz_bgsr::estimators::{estimate, Algorithm};
use thz_bgsr::harness::draw_trial;
use thz_bgsr::harness::trial::estimator_settings;
use thz_bgsr::metrics::{nmse, to_db};
use thz_bgsr::ScenarioConfig;

fn main() -> thz_bgsr::Result<()> {
    let cfg = ScenarioConfig::desk().with_snr_db(10.0);
    let dict = SparsifyingDictionary::new(&cfg, DictionaryMode::OnGrid)?;
    let env = Environment::from_config(&cfg)?;
    let data = draw_trial(&cfg, &dict, &env, 1, 0)?;

    let settings = estimator_settings(&cfg);
    println!("stopping threshold {:.4}, K_max {}", settings.bgsr.eps, settings.bgsr.k_max);
    let out = estimate(Algorithm::Bgsr, &data.xi, &data.measurements.y_mu, &data.c_w, &dict, &settings)?;
    for (j, d) in out.trace.iter().enumerate() {
        println!("iteration {:2}: ‖ΔΓ‖² = {d:.4e}", j + 1);
    }
    let gamma = out.gamma.as_deref().unwrap_or_default();
    let mut top: Vec<(usize, f64)> = gamma.iter().cloned().enumerate().collect();
    top.sort_by(|a, b| b.1.total_cmp(&a.1));
    for &(i, g) in top.iter().take(5) {
        let (u, t, r) = dict.decode(i);
        println!("atom {i:4} (user {u}, tx {t}, rx {r}): γ = {g:.4e}");
    }
    let strong = gamma.iter().filter(|g| **g > 0.01 * top[0].1).count();
    println!(
        "{} of {} atoms active ({strong} above 1% of the largest), NMSE {:.2} dB in {:.1} ms",
        out.support.len(),
        dict.columns(),
        to_db(nmse(&out.h_hat, &data.channel.cfr)?),
        out.wall_time * 1e3
    );
    Ok(())
}
