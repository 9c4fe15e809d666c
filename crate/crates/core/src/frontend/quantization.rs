//! Bussgang-linearized ADC model and a reference uniform quantizer.

use crate::config::AdcBits;
use crate::error::{Error, Result};
use crate::linalg::C64;

/// Quantization noise-to-signal ratio for 1 to 5 bits.
pub const UPSILON_TABLE: [f64; 5] = [0.3634, 0.1175, 0.03454, 0.009497, 0.002499];

/// Distortion-minimizing uniform step sizes (in units of the per-component
/// standard deviation) for 1 to 5 bits.
const OPTIMAL_STEP: [f64; 5] = [1.596, 0.9957, 0.5860, 0.3352, 0.1881];

/// Returns `(υ, ε)` with `ε = 1 − υ`.
pub fn bussgang_epsilon(bits: AdcBits) -> Result<(f64, f64)> {
    let upsilon = match bits {
        AdcBits::Infinite => 0.0,
        AdcBits::Finite(0) => return Err(Error::input("ADC resolution must be at least 1 bit")),
        AdcBits::Finite(b @ 1..=5) => UPSILON_TABLE[b as usize - 1],
        AdcBits::Finite(b) => std::f64::consts::PI * 3f64.sqrt() / 2.0 * 2f64.powi(-2 * b as i32),
    };
    Ok((upsilon, 1.0 - upsilon))
}

/// Linear gain model `D = ε I` of the quantizer bank.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantizationModel {
    pub bits: AdcBits,
    pub upsilon: f64,
    pub epsilon: f64,
}

impl QuantizationModel {
    pub fn new(bits: AdcBits) -> Result<Self> {
        let (upsilon, epsilon) = bussgang_epsilon(bits)?;
        Ok(QuantizationModel { bits, upsilon, epsilon })
    }
}

fn step_for(bits: u32, sigma: f64) -> f64 {
    if bits <= 5 {
        OPTIMAL_STEP[bits as usize - 1] * sigma
    } else {
        let (u, _) = bussgang_epsilon(AdcBits::Finite(bits)).expect("bits > 0");
        sigma * (12.0 * u).sqrt()
    }
}

fn midrise(x: f64, step: f64, levels: f64) -> f64 {
    let top = (levels / 2.0 - 0.5) * step;
    (step * ((x / step).floor() + 0.5)).clamp(-top, top)
}

/// Element-wise midrise quantization of real and imaginary parts, with the step
/// sized to the input's per-component standard deviation.
pub fn uniform_quantizer(x: &[C64], bits: AdcBits) -> Result<Vec<C64>> {
    let b = match bits {
        AdcBits::Infinite => return Ok(x.to_vec()),
        AdcBits::Finite(0) => return Err(Error::input("ADC resolution must be at least 1 bit")),
        AdcBits::Finite(b) => b,
    };
    if x.is_empty() {
        return Ok(Vec::new());
    }
    let power: f64 = x.iter().map(|z| z.norm_sqr()).sum::<f64>() / x.len() as f64;
    let sigma = (power / 2.0).sqrt();
    if sigma == 0.0 {
        return Ok(x.to_vec());
    }
    let step = step_for(b, sigma);
    let levels = 2f64.powi(b as i32);
    Ok(x.iter()
        .map(|z| C64::new(midrise(z.re, step, levels), midrise(z.im, step, levels)))
        .collect())
}
