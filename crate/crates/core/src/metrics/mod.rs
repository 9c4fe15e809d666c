//! Error metrics, the Bayesian Cramér-Rao bound and the data-detection link.

pub mod bcrb;
pub mod ber;

pub use bcrb::{bcrb, significant_gamma, BcrbResult};
pub use ber::{effective_channel, mmse_equalize_detect, mmse_equalizer, BerCount, Psk};

use crate::error::{Error, Result};
use crate::linalg::{frob2, CMat};

/// `Σ_k ‖Ĥ[k] − H[k]‖_F² / Σ_k ‖H[k]‖_F²`.
pub fn nmse(h_hat: &[CMat], h_true: &[CMat]) -> Result<f64> {
    if h_hat.len() != h_true.len() || h_hat.iter().zip(h_true).any(|(a, b)| a.shape() != b.shape()) {
        return Err(Error::input("estimate and truth differ in shape"));
    }
    let den: f64 = h_true.iter().map(frob2).sum();
    if den == 0.0 {
        return Err(Error::input("NMSE is undefined for an all-zero channel"));
    }
    Ok(squared_error(h_hat, h_true) / den)
}

/// `Σ_k ‖Ĥ[k] − H[k]‖_F²`; shapes are assumed to match.
pub fn squared_error(h_hat: &[CMat], h_true: &[CMat]) -> f64 {
    h_hat.iter().zip(h_true).map(|(a, b)| frob2(&(a - b))).sum()
}

pub fn to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{crandn_mat, C64};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn nmse_reference_points() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let h: Vec<CMat> = (0..4).map(|_| crandn_mat(3, 5, &mut rng)).collect();
        let zero: Vec<CMat> = h.iter().map(|m| m * C64::new(0.0, 0.0)).collect();
        let twice: Vec<CMat> = h.iter().map(|m| m * C64::new(2.0, 0.0)).collect();
        assert_eq!(nmse(&h, &h).unwrap(), 0.0);
        assert!((nmse(&zero, &h).unwrap() - 1.0).abs() < 1e-15);
        assert!((nmse(&twice, &h).unwrap() - 1.0).abs() < 1e-14);
        assert!(nmse(&h, &zero).is_err());
        assert!(nmse(&h[..2], &h).is_err());
    }

    #[test]
    fn nmse_scale_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let h: Vec<CMat> = (0..3).map(|_| crandn_mat(4, 4, &mut rng)).collect();
        let e: Vec<CMat> = (0..3).map(|_| crandn_mat(4, 4, &mut rng)).collect();
        let s = C64::new(-3.5, 0.0);
        let hs: Vec<CMat> = h.iter().map(|m| m * s).collect();
        let es: Vec<CMat> = e.iter().map(|m| m * s).collect();
        assert!((nmse(&e, &h).unwrap() - nmse(&es, &hs).unwrap()).abs() < 1e-12);
    }
}
