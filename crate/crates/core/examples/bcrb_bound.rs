//! Plug-in Bayesian Cramér-Rao bound next to the BGSR error.

use thz_bgsr::channel::Environment;
use thz_bgsr::dictionary::{DictionaryMode, SparsifyingDictionary};
use thz_bgsr::estimators::{estimate, Algorithm};
use thz_bgsr::harness::draw_trial;
use thz_bgsr::harness::trial::{estimator_settings, BCRB_SUPPORT_RELATIVE};
use thz_bgsr::linalg::frob2;
use thz_bgsr::metrics::{bcrb, significant_gamma, squared_error, to_db};
use thz_bgsr::ScenarioConfig;

fn main() -> thz_bgsr::Result<()> {
    for snr in [0.0, 5.0, 10.0, 15.0] {
        let cfg = ScenarioConfig::desk().with_snr_db(snr);
        let dict = SparsifyingDictionary::new(&cfg, DictionaryMode::OnGrid)?;
        let env = Environment::from_config(&cfg)?;
        let (mut err, mut bound, mut energy) = (0.0, 0.0, 0.0);
        for trial in 0..5 {
            let d = draw_trial(&cfg, &dict, &env, 1, trial)?;
            let out = estimate(Algorithm::Bgsr, &d.xi, &d.measurements.y_mu, &d.c_w, &dict, &estimator_settings(&cfg))?;
            let e: f64 = d.channel.cfr.iter().map(frob2).sum();
            let g = significant_gamma(out.gamma.as_deref().unwrap_or_default(), BCRB_SUPPORT_RELATIVE);
            let b = bcrb(&d.xi, &d.c_w, &g, &dict, e)?;
            err += squared_error(&out.h_hat, &d.channel.cfr);
            bound += b.bound;
            energy += e;
        }
        println!("{snr:4.0} dB: BGSR {:7.2} dB, BCRB {:7.2} dB", to_db(err / energy), to_db(bound / energy));
    }
    Ok(())
}
