//! Random phase-quantized analog precoders and combiners.

use std::f64::consts::PI;

use rand::Rng;

use crate::config::ScenarioConfig;
use crate::linalg::{CMat, C64};

/// Matrix with entries `scale·exp(jϑ)`, `ϑ` uniform on the `2^{N_Q}`-point phase set.
pub fn draw_quantized_phasebook<R: Rng + ?Sized>(rows: usize, cols: usize, nq: u32, scale: f64, rng: &mut R) -> CMat {
    let levels = 1usize << nq;
    CMat::from_fn(rows, cols, |_, _| {
        let i = rng.random_range(0..levels);
        C64::from_polar(scale, 2.0 * PI * i as f64 / levels as f64)
    })
}

/// Analog combiners per block and precoders per block and user.
#[derive(Debug, Clone)]
pub struct RfCodebook {
    /// `M` combiners of shape `N_R × N_RF_R`.
    pub w_rf: Vec<CMat>,
    /// `M × U` precoders of shape `N_Tu × N_RFu_T`.
    pub f_rf: Vec<Vec<CMat>>,
}

impl RfCodebook {
    pub fn draw<R: Rng + ?Sized>(cfg: &ScenarioConfig, rng: &mut R) -> Self {
        let (nr, ntu) = (cfg.rx_antennas, cfg.tx_antennas_per_user);
        let mut w_rf = Vec::with_capacity(cfg.pilot_blocks);
        let mut f_rf = Vec::with_capacity(cfg.pilot_blocks);
        for _ in 0..cfg.pilot_blocks {
            w_rf.push(draw_quantized_phasebook(nr, cfg.rx_rf_chains, cfg.phase_bits, 1.0 / (nr as f64).sqrt(), rng));
            f_rf.push(
                (0..cfg.num_users)
                    .map(|_| draw_quantized_phasebook(ntu, cfg.tx_rf_chains, cfg.phase_bits, 1.0 / (ntu as f64).sqrt(), rng))
                    .collect(),
            );
        }
        RfCodebook { w_rf, f_rf }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn one_bit_is_antipodal() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let m = draw_quantized_phasebook(8, 8, 1, 0.5, &mut rng);
        for z in m.iter() {
            assert!((z - C64::new(0.5, 0.0)).norm() < 1e-15 || (z + C64::new(0.5, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn constant_modulus_codebooks() {
        let cfg = ScenarioConfig::desk();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let cb = RfCodebook::draw(&cfg, &mut rng);
        assert_eq!(cb.w_rf.len(), cfg.pilot_blocks);
        for w in &cb.w_rf {
            assert_eq!(w.shape(), (cfg.rx_antennas, cfg.rx_rf_chains));
            assert!(w.iter().all(|z| (z.norm() - 0.25).abs() < 1e-15));
        }
        for f in cb.f_rf.iter().flatten() {
            assert!(f.iter().all(|z| (z.norm() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15));
        }
    }

    #[test]
    fn four_bit_phase_histogram_uniform() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let m = draw_quantized_phasebook(1000, 100, 4, 1.0, &mut rng);
        let mut counts = [0usize; 16];
        for z in m.iter() {
            let idx = ((z.arg().rem_euclid(2.0 * PI)) / (2.0 * PI / 16.0)).round() as usize % 16;
            counts[idx] += 1;
        }
        let expected = 1e5 / 16.0;
        let chi2: f64 = counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
        // 99th percentile of χ² with 15 degrees of freedom.
        assert!(chi2 < 30.58, "chi2 = {chi2}");
    }
}
