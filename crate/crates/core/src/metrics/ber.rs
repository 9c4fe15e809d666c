//! Uncoded PSK data detection with a linear MMSE equalizer.

use std::f64::consts::PI;

use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{blkdiag, cholesky, crandn_vec, hpd_inverse, CMat, CVec, C64};

/// Gray-labelled `M`-PSK: point `i` sits at angle `2πi/M` and carries the
/// label `i ^ (i >> 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Psk {
    pub order: usize,
}

impl Psk {
    pub fn new(order: usize) -> Result<Self> {
        if order < 2 || !order.is_power_of_two() {
            return Err(Error::input(format!("PSK order {order} is not a power of two >= 2")));
        }
        Ok(Psk { order })
    }

    pub fn bits_per_symbol(&self) -> u32 {
        self.order.trailing_zeros()
    }

    pub fn point(&self, i: usize) -> C64 {
        C64::from_polar(1.0, 2.0 * PI * i as f64 / self.order as f64)
    }

    pub fn label(&self, i: usize) -> usize {
        i ^ (i >> 1)
    }

    /// Nearest constellation index.
    pub fn detect(&self, z: C64) -> usize {
        let m = self.order as f64;
        let i = (z.arg() * m / (2.0 * PI)).round() as i64;
        i.rem_euclid(self.order as i64) as usize
    }

    pub fn bit_errors(&self, sent: usize, detected: usize) -> u32 {
        (self.label(sent) ^ self.label(detected)).count_ones()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct BerCount {
    pub errors: u64,
    pub bits: u64,
}

impl BerCount {
    pub fn rate(&self) -> f64 {
        if self.bits == 0 {
            0.0
        } else {
            self.errors as f64 / self.bits as f64
        }
    }

    pub fn merge(&mut self, other: BerCount) {
        self.errors += other.errors;
        self.bits += other.bits;
    }
}

/// Combined channel `D W^H H[k] blkdiag(F_1, …, F_U)` seen by the data streams.
pub fn effective_channel(h_k: &CMat, dw: &CMat, f_rf: &[CMat]) -> Result<CMat> {
    let f = blkdiag(f_rf);
    if h_k.nrows() != dw.ncols() || h_k.ncols() != f.nrows() {
        return Err(Error::input("channel, combiner and precoders disagree in size"));
    }
    Ok(dw * h_k * f)
}

/// `(Ĥ^H Ĥ + σ² I)^{-1} Ĥ^H`.
pub fn mmse_equalizer(h_hat: &CMat, noise_var: f64) -> Result<CMat> {
    let n = h_hat.ncols();
    let g = h_hat.ad_mul(h_hat) + CMat::identity(n, n) * C64::new(noise_var.max(0.0), 0.0);
    Ok(hpd_inverse(&g)? * h_hat.adjoint())
}

/// Sends `n_d` random symbol vectors of power `power` per stream through
/// `h_true` with noise `CN(0, noise_cov)`, equalizes with the MMSE filter
/// built from `h_hat` and counts Gray-labelled bit errors.
#[allow(clippy::too_many_arguments)]
pub fn mmse_equalize_detect<R: Rng + ?Sized>(
    h_true: &CMat,
    h_hat: &CMat,
    noise_cov: Option<&CMat>,
    noise_var: f64,
    power: f64,
    psk: Psk,
    n_d: usize,
    rng: &mut R,
) -> Result<BerCount> {
    if h_true.shape() != h_hat.shape() {
        return Err(Error::input("true and estimated effective channels differ in shape"));
    }
    if !(power > 0.0) {
        return Err(Error::input("transmit power must be positive"));
    }
    let (rows, streams) = h_true.shape();
    let amp = power.sqrt();
    let eq = mmse_equalizer(&(h_hat * C64::new(amp, 0.0)), noise_var)?;
    let l = match noise_cov {
        Some(c) if c.shape() == (rows, rows) => Some(cholesky(c)?.l()),
        Some(_) => return Err(Error::input("noise covariance does not match the channel rows")),
        None => None,
    };
    let mut count = BerCount::default();
    for _ in 0..n_d {
        let sent: Vec<usize> = (0..streams).map(|_| rng.random_range(0..psk.order)).collect();
        let x = CVec::from_iterator(streams, sent.iter().map(|&i| psk.point(i) * amp));
        let mut y = h_true * x;
        if let Some(l) = &l {
            y += l * crandn_vec(rows, rng);
        }
        let s_hat = &eq * y;
        for (j, &i) in sent.iter().enumerate() {
            count.errors += psk.bit_errors(i, psk.detect(s_hat[j])) as u64;
        }
        count.bits += (streams as u64) * psk.bits_per_symbol() as u64;
    }
    Ok(count)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::crandn_mat;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn gray_neighbours_differ_in_one_bit() {
        for order in [8, 16, 64] {
            let p = Psk::new(order).unwrap();
            let mut labels: Vec<usize> = (0..order).map(|i| p.label(i)).collect();
            for i in 0..order {
                assert_eq!(p.bit_errors(i, (i + 1) % order), 1);
                assert_eq!(p.detect(p.point(i) * C64::new(0.7, 0.0)), i);
            }
            labels.sort();
            assert_eq!(labels, (0..order).collect::<Vec<_>>());
        }
        assert!(Psk::new(6).is_err());
    }

    #[test]
    fn noiseless_perfect_csi_is_error_free() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let h = crandn_mat(4, 4, &mut rng) + CMat::identity(4, 4) * C64::new(3.0, 0.0);
        let c = mmse_equalize_detect(&h, &h, None, 0.0, 1.0, Psk::new(8).unwrap(), 200, &mut rng).unwrap();
        assert_eq!(c.errors, 0);
        assert_eq!(c.bits, 200 * 4 * 3);
    }

    #[test]
    fn zero_estimate_guesses() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let h = crandn_mat(4, 2, &mut rng);
        let noise = CMat::identity(4, 4) * C64::new(0.1, 0.0);
        let c = mmse_equalize_detect(&h, &CMat::zeros(4, 2), Some(&noise), 0.1, 1.0, Psk::new(8).unwrap(), 2000, &mut rng)
            .unwrap();
        assert!(c.bits >= 10_000);
        assert!((c.rate() - 0.5).abs() < 0.05, "{}", c.rate());
    }
}
