//! Synthesizes the quantized pilot outputs and checks them against the
//! time-domain reference path.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thz_bgsr::channel::{generate_channel, Environment};
use thz_bgsr::config::AdcBits;
use thz_bgsr::frontend::measurement::{time_domain_output, TimeDomainAdc};
use thz_bgsr::frontend::{bussgang_epsilon, synthesize_measurements, PilotFrame, QuantizationModel, RfCodebook};
use thz_bgsr::linalg::real_diagonal;
use thz_bgsr::ScenarioConfig;

fn main() -> thz_bgsr::Result<()> {
    for b in [1, 2, 3, 4, 5, 8] {
        let (u, e) = bussgang_epsilon(AdcBits::Finite(b))?;
        println!("{b} bits: υ = {u:.6}, ε = {e:.6}");
    }

    let cfg = ScenarioConfig::desk().with_snr_db(10.0);
    let env = Environment::from_config(&cfg)?;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let ch = generate_channel(&cfg, &env, &mut rng)?;
    let cb = RfCodebook::draw(&cfg, &mut rng);
    let pilots = PilotFrame::draw(&cfg, &mut rng);
    let quant = QuantizationModel::new(cfg.adc_bits)?;

    let clean = synthesize_measurements::<ChaCha8Rng>(&cfg, &ch, &cb, &pilots, &quant, None)?;
    let noisy = synthesize_measurements(&cfg, &ch, &cb, &pilots, &quant, Some(&mut rng))?;
    let td = time_domain_output(&cfg, &ch, &cb, &pilots, &quant, TimeDomainAdc::Linearized)?;
    let uq = time_domain_output(&cfg, &ch, &cb, &pilots, &quant, TimeDomainAdc::Uniform)?;

    let rel = |a: &thz_bgsr::linalg::CMat| (a - &clean.y_mu).norm() / clean.y_mu.norm();
    println!("Y_MU is {}×{}", clean.y_mu.nrows(), clean.y_mu.ncols());
    println!("time-domain vs frequency model: {:.2e}", rel(&td));
    println!("uniform quantizer vs linearized model: {:.3}", rel(&uq));
    println!("additive noise relative to signal: {:.3}", rel(&noisy.y_mu));
    println!("diag R_vv of block 0: {:?}", real_diagonal(&clean.rvv[0]).iter().map(|x| format!("{x:.4}")).collect::<Vec<_>>());
    Ok(())
}
