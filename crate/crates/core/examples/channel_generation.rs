//! Draws one desk-preset channel and prints its paths and beam squint.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thz_bgsr::channel::{effective_aoa, generate_channel, subcarrier_frequencies, Environment};
use thz_bgsr::linalg::frob2;
use thz_bgsr::ScenarioConfig;

fn main() -> thz_bgsr::Result<()> {
    let cfg = ScenarioConfig::desk();
    let env = Environment::from_config(&cfg)?;
    let ch = generate_channel(&cfg, &env, &mut ChaCha8Rng::seed_from_u64(1))?;

    for (u, paths) in ch.paths.iter().enumerate() {
        println!("user {u}");
        for p in paths {
            println!(
                "  {:?} cluster {} ray {}: AoA {:7.2}°, AoD {:7.2}°, {:.2} m, {:.3} ns",
                p.kind, p.cluster, p.ray, p.aoa_deg, p.aod_deg, p.distance_m, p.delay_s * 1e9
            );
        }
    }

    let freqs = subcarrier_frequencies(&cfg);
    let los = ch.paths[0][0].aoa_deg.to_radians();
    for (k, f) in freqs.iter().enumerate().step_by(5) {
        let squinted = effective_aoa(los, f / cfg.carrier_hz).to_degrees();
        println!("k={k:2}  f={:.3} GHz  ‖H‖²={:.3e}  LoS AoA seen as {squinted:.3}°", f / 1e9, frob2(&ch.cfr[k]));
    }
    println!("total energy {:.3e}", ch.energy());
    Ok(())
}
