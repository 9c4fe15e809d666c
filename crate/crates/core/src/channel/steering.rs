//! Frequency-dependent ULA array response (beam squint).

use std::f64::consts::PI;

use crate::config::ScenarioConfig;
use crate::error::{Error, Result};
use crate::linalg::{CVec, C64};

/// Frequency of subcarrier `k` (1-based): `f_c + (k - (K+1)/2)·B/K`.
pub fn subcarrier_frequency(k: usize, cfg: &ScenarioConfig) -> Result<f64> {
    let kk = cfg.subcarriers;
    if k == 0 || k > kk {
        return Err(Error::input(format!("subcarrier index {k} outside 1..={kk}")));
    }
    Ok(subcarrier_frequency_raw(k, kk, cfg.carrier_hz, cfg.bandwidth_hz))
}

pub(crate) fn subcarrier_frequency_raw(k: usize, kk: usize, fc: f64, bw: f64) -> f64 {
    fc + (k as f64 - (kk as f64 + 1.0) / 2.0) * bw / kk as f64
}

/// All subcarrier frequencies, indexed from 0.
pub fn subcarrier_frequencies(cfg: &ScenarioConfig) -> Vec<f64> {
    (1..=cfg.subcarriers)
        .map(|k| subcarrier_frequency_raw(k, cfg.subcarriers, cfg.carrier_hz, cfg.bandwidth_hz))
        .collect()
}

/// Effective spatial angle seen at relative frequency `rho_k = f_k / f_c`.
pub fn effective_aoa(phi: f64, rho_k: f64) -> f64 {
    (rho_k * phi.cos()).clamp(-1.0, 1.0).acos()
}

/// Steering vector with entries `(1/√N)·exp(-jπ n (f_k/f_c) cos φ)`.
pub fn steering_vector(phi: f64, f_k: f64, n: usize, f_c: f64) -> Result<CVec> {
    if n == 0 {
        return Err(Error::input("steering vector needs at least one antenna"));
    }
    Ok(steering_from_cosine(phi.cos(), f_k / f_c, n))
}

/// Same as [`steering_vector`] parameterized directly by the directional cosine.
pub fn steering_from_cosine(cos_phi: f64, rho: f64, n: usize) -> CVec {
    let scale = 1.0 / (n as f64).sqrt();
    CVec::from_fn(n, |i, _| C64::from_polar(scale, -PI * i as f64 * rho * cos_phi))
}

/// Derivative of the steering vector with respect to `φ`.
pub fn steering_derivative(phi: f64, f_k: f64, n: usize, f_c: f64) -> CVec {
    let rho = f_k / f_c;
    let a = steering_from_cosine(phi.cos(), rho, n);
    let s = phi.sin();
    CVec::from_fn(n, |i, _| a[i] * C64::new(0.0, PI * i as f64 * rho * s))
}
