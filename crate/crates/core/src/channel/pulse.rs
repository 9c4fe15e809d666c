//! Pulse-shaping coefficients of delayed multipath components.

use std::f64::consts::PI;

use crate::config::PulseShape;
use crate::linalg::C64;

/// Impulse response `p(t)` sampled at time `t` for symbol period `ts`.
pub fn pulse(psf: PulseShape, t: f64, ts: f64, rolloff: f64) -> f64 {
    match psf {
        PulseShape::Rect => {
            if (0.0..ts).contains(&t) {
                1.0
            } else {
                0.0
            }
        }
        PulseShape::Rrc => rrc(t / ts, rolloff),
    }
}

/// Root-raised-cosine response at normalized time `x = t/T`.
fn rrc(x: f64, beta: f64) -> f64 {
    if x.abs() < 1e-12 {
        return 1.0 - beta + 4.0 * beta / PI;
    }
    if beta > 0.0 && (x.abs() - 1.0 / (4.0 * beta)).abs() < 1e-9 {
        let a = PI / (4.0 * beta);
        return beta / 2f64.sqrt() * ((1.0 + 2.0 / PI) * a.sin() + (1.0 - 2.0 / PI) * a.cos());
    }
    let num = (PI * x * (1.0 - beta)).sin() + 4.0 * beta * x * (PI * x * (1.0 + beta)).cos();
    let den = PI * x * (1.0 - (4.0 * beta * x).powi(2));
    num / den
}

/// `β_τ[k] = Σ_{l=0}^{K-1} p(l T_s − τ) e^{−j2πkl/K}` for frequency bin `k` (0-based).
pub fn pulse_shaping_coefficient(k: usize, tau: f64, psf: PulseShape, ts: f64, rolloff: f64, kk: usize) -> C64 {
    let mut acc = C64::new(0.0, 0.0);
    for l in 0..kk {
        let p = pulse(psf, l as f64 * ts - tau, ts, rolloff);
        if p != 0.0 {
            let ang = -2.0 * PI * (k * l % kk) as f64 / kk as f64;
            acc += C64::from_polar(p, ang);
        }
    }
    acc
}

/// Coefficients for every bin `0..kk`.
pub fn pulse_shaping_coefficients(tau: f64, psf: PulseShape, ts: f64, rolloff: f64, kk: usize) -> Vec<C64> {
    let samples: Vec<f64> = (0..kk).map(|l| pulse(psf, l as f64 * ts - tau, ts, rolloff)).collect();
    (0..kk)
        .map(|k| {
            samples
                .iter()
                .enumerate()
                .filter(|(_, p)| **p != 0.0)
                .map(|(l, p)| C64::from_polar(*p, -2.0 * PI * (k * l % kk) as f64 / kk as f64))
                .sum()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const TS: f64 = 2e-10;

    #[test]
    fn rect_at_zero_delay_is_one() {
        for k in 0..16 {
            let b = pulse_shaping_coefficient(k, 0.0, PulseShape::Rect, TS, 0.8, 16);
            assert!((b - C64::new(1.0, 0.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn dc_bin_is_sample_sum() {
        for psf in [PulseShape::Rrc, PulseShape::Rect] {
            let tau = 0.0;
            let b = pulse_shaping_coefficient(0, tau, psf, TS, 0.8, 16);
            let sum: f64 = (0..16).map(|l| pulse(psf, l as f64 * TS, TS, 0.8)).sum();
            assert!((b.re - sum).abs() < 1e-12 && b.im.abs() < 1e-12);
        }
    }

    #[test]
    fn rrc_reference_points() {
        assert!((pulse(PulseShape::Rrc, 0.0, TS, 0.8) - (0.2 + 3.2 / PI)).abs() < 1e-15);
        // Continuity across the removable singularity at t = T/(4β).
        let t0 = TS / (4.0 * 0.8);
        let at = pulse(PulseShape::Rrc, t0, TS, 0.8);
        let near = pulse(PulseShape::Rrc, t0 * (1.0 + 1e-6), TS, 0.8);
        assert!((at - near).abs() < 1e-5);
        // β = 0 reduces to a sinc with zeros at integer symbol times.
        assert!(pulse(PulseShape::Rrc, 3.0 * TS, TS, 0.0).abs() < 1e-15);
    }

    #[test]
    fn magnitude_invariant_under_whole_sample_shift() {
        // Brute-force reindexing: delaying by T_s shifts the sample index by one.
        let kk = 32;
        for psf in [PulseShape::Rect, PulseShape::Rrc] {
            let tau = 0.37 * TS;
            for k in 0..kk {
                let shifted = pulse_shaping_coefficient(k, tau + TS, psf, TS, 0.8, kk);
                let mut oracle = C64::new(0.0, 0.0);
                for l in 0..kk {
                    let p = pulse(psf, (l as f64 - 1.0) * TS - tau, TS, 0.8);
                    oracle += C64::from_polar(p, -2.0 * PI * (k * l) as f64 / kk as f64);
                }
                assert!((shifted - oracle).norm() < 1e-12);
                let base = pulse_shaping_coefficient(k, tau, psf, TS, 0.8, kk);
                let trunc = pulse(psf, (kk - 1) as f64 * TS - tau, TS, 0.8).abs()
                    + pulse(psf, -TS - tau, TS, 0.8).abs();
                assert!((shifted.norm() - base.norm()).abs() <= trunc + 1e-12);
            }
        }
    }

    #[test]
    fn vectorized_matches_scalar() {
        let v = pulse_shaping_coefficients(0.6 * TS, PulseShape::Rrc, TS, 0.8, 16);
        for (k, b) in v.iter().enumerate() {
            assert!((b - pulse_shaping_coefficient(k, 0.6 * TS, PulseShape::Rrc, TS, 0.8, 16)).norm() < 1e-12);
        }
    }
}
