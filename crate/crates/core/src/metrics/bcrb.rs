//! Plug-in Bayesian Cramér-Rao bound on the channel MSE.

use crate::dictionary::SparsifyingDictionary;
use crate::error::{Error, Result};
use crate::linalg::{cholesky, hermitian_deviation, CMat, C64};

#[derive(Debug, Clone)]
pub struct BcrbResult {
    /// Atoms with `γ̂ > 0`; the FIM is restricted to them.
    pub support: Vec<usize>,
    /// Per-subcarrier `Ξ_k,S^H C_w^{-1} Ξ_k,S + Γ̂_S^{-1}`.
    pub fim: Vec<CMat>,
    /// `Σ_k Tr(Ψ_k,S I_k^{-1} Ψ_k,S^H)`.
    pub bound: f64,
    /// `bound / Σ_k ‖H[k]‖_F²` for the supplied channel energy.
    pub bound_nmse: f64,
}

/// Hyperparameters at or below `rel · max(γ)` zeroed; the survivors are the
/// support the plug-in bound is evaluated on.
pub fn significant_gamma(gamma: &[f64], rel: f64) -> Vec<f64> {
    let max = gamma.iter().cloned().fold(0.0, f64::max);
    gamma.iter().map(|&g| if g > rel * max { g } else { 0.0 }).collect()
}

fn gather(m: &CMat, idx: &[usize]) -> CMat {
    let mut out = CMat::zeros(m.nrows(), idx.len());
    for (j, &i) in idx.iter().enumerate() {
        out.column_mut(j).copy_from(&m.column(i));
    }
    out
}

/// Bound on `E Σ_k ‖Ĥ[k] − H[k]‖_F²` given hyperparameters `γ̂`.
///
/// Atoms with `γ̂_i = 0` carry no prior uncertainty and are left out. The
/// beamspace coefficients are independent across subcarriers, so the FIM is
/// block diagonal in `k` and each block is inverted separately, directly when
/// the support fits in the measurement rows and through Woodbury otherwise.
pub fn bcrb(
    xi: &[CMat],
    c_w: &CMat,
    gamma_hat: &[f64],
    dict: &SparsifyingDictionary,
    channel_energy: f64,
) -> Result<BcrbResult> {
    if xi.len() != dict.subcarriers() || xi.iter().any(|x| x.ncols() != gamma_hat.len() || x.nrows() != c_w.nrows()) {
        return Err(Error::input("sensing tensor, noise covariance and hyperparameters disagree in size"));
    }
    if gamma_hat.len() != dict.columns() {
        return Err(Error::input("hyperparameter length does not match the dictionary"));
    }
    if gamma_hat.iter().any(|g| !(*g >= 0.0) || !g.is_finite()) {
        return Err(Error::input("hyperparameters must be finite and nonnegative"));
    }
    if !(channel_energy > 0.0) {
        return Err(Error::input("channel energy must be positive"));
    }
    let support: Vec<usize> = (0..gamma_hat.len()).filter(|i| gamma_hat[*i] > 0.0).collect();
    if support.is_empty() {
        return Err(Error::input("all hyperparameters are zero"));
    }
    let l_w = cholesky(c_w)?.l();
    let m = c_w.nrows();
    let mut fim = Vec::with_capacity(xi.len());
    let mut bound = 0.0;
    for (k, x) in xi.iter().enumerate() {
        let xs = gather(x, &support);
        let w = l_w
            .solve_lower_triangular(&xs)
            .ok_or_else(|| Error::Numerical("singular noise covariance factor".into()))?;
        let mut info = w.ad_mul(&w);
        for (j, &i) in support.iter().enumerate() {
            info[(j, j)] += C64::new(1.0 / gamma_hat[i], 0.0);
        }
        let dev = hermitian_deviation(&info);
        if dev > 1e-12 * info.norm() {
            return Err(Error::Numerical(format!("FIM Hermitian deviation {dev:.3e}")));
        }
        let psi = gather(&dict.psi_mu(k), &support);
        bound += if support.len() <= m {
            // Tr(Ψ I^{-1} Ψ^H) = ‖L_I^{-1} Ψ^H‖_F²
            let chol = cholesky(&info).map_err(|e| Error::Numerical(format!("singular FIM on subcarrier {k}: {e}")))?;
            chol.l()
                .solve_lower_triangular(&psi.adjoint())
                .ok_or_else(|| Error::Numerical("singular FIM factor".into()))?
                .norm_squared()
        } else {
            // I^{-1} = Γ − Γ Ξ^H (C_w + Ξ Γ Ξ^H)^{-1} Ξ Γ
            let g = CMat::from_diagonal(&nalgebra::DVector::from_iterator(
                support.len(),
                support.iter().map(|&i| C64::new(gamma_hat[i], 0.0)),
            ));
            let s = c_w + &xs * &g * xs.adjoint();
            let v = cholesky(&s)?
                .l()
                .solve_lower_triangular(&(&xs * &g * psi.adjoint()))
                .ok_or_else(|| Error::Numerical("singular Cholesky factor".into()))?;
            let prior: f64 = support.iter().enumerate().map(|(j, &i)| gamma_hat[i] * psi.column(j).norm_squared()).sum();
            prior - v.norm_squared()
        };
        fim.push(info);
    }
    Ok(BcrbResult { support, fim, bound, bound_nmse: bound / channel_energy })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ScenarioConfig;
    use crate::dictionary::DictionaryMode;
    use crate::linalg::{crandn_mat, hpd_inverse};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn setup(seed: u64) -> (SparsifyingDictionary, Vec<CMat>, CMat) {
        let cfg = ScenarioConfig::desk();
        let d = SparsifyingDictionary::new(&cfg, DictionaryMode::OnGrid).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = cfg.measurement_rows();
        let xi = (0..d.subcarriers()).map(|_| crandn_mat(m, d.columns(), &mut rng)).collect();
        let b = crandn_mat(m, m, &mut rng);
        let c_w = &b * b.adjoint() * C64::new(0.01, 0.0) + CMat::identity(m, m) * C64::new(0.1, 0.0);
        (d, xi, c_w)
    }

    fn sparse_gamma(n: usize, idx: &[usize], value: f64) -> Vec<f64> {
        let mut g = vec![0.0; n];
        for &i in idx {
            g[i] = value;
        }
        g
    }

    #[test]
    fn flat_prior_limit_matches_data_only_crb() {
        let (d, xi, c_w) = setup(1);
        let idx = [3, 40, 77, 130, 250];
        let g = sparse_gamma(d.columns(), &idx, 1e12);
        let r = bcrb(&xi, &c_w, &g, &d, 1.0).unwrap();
        let cinv = hpd_inverse(&c_w).unwrap();
        let mut want = 0.0;
        for k in 0..d.subcarriers() {
            let xs = gather(&xi[k], &idx);
            let crb = hpd_inverse(&(xs.adjoint() * &cinv * &xs)).unwrap();
            let psi = gather(&d.psi_mu(k), &idx);
            want += (&psi * crb * psi.adjoint()).trace().re;
        }
        assert!((r.bound - want).abs() < 1e-6 * want);
        for f in &r.fim {
            assert!(hermitian_deviation(f) < 1e-12 * f.norm());
        }
    }

    #[test]
    fn bound_scales_with_noise() {
        let (d, xi, c_w) = setup(2);
        let g = sparse_gamma(d.columns(), &[10, 20, 30], 1e9);
        let a = bcrb(&xi, &c_w, &g, &d, 1.0).unwrap().bound;
        let b = bcrb(&xi, &(&c_w * C64::new(4.0, 0.0)), &g, &d, 1.0).unwrap().bound;
        assert!((b / a - 4.0).abs() < 0.04);
    }

    #[test]
    fn more_measurements_never_raise_the_bound() {
        let (d, xi, c_w) = setup(3);
        let g = sparse_gamma(d.columns(), &(0..60).map(|i| i * 4).collect::<Vec<_>>(), 2.0);
        let full = bcrb(&xi, &c_w, &g, &d, 1.0).unwrap().bound;
        let half_rows = c_w.nrows() / 2;
        let xi_h: Vec<CMat> = xi.iter().map(|x| x.rows(0, half_rows).into_owned()).collect();
        let c_h = c_w.view((0, 0), (half_rows, half_rows)).into_owned();
        let partial = bcrb(&xi_h, &c_h, &g, &d, 1.0).unwrap().bound;
        assert!(full <= partial);
        assert!(full > 0.0);
    }

    #[test]
    fn woodbury_form_matches_information_form() {
        let (d, xi, c_w) = setup(5);
        let m = c_w.nrows();
        let idx: Vec<usize> = (0..m + 8).map(|i| i * 6).collect();
        let g = sparse_gamma(d.columns(), &idx, 0.5);
        let r = bcrb(&xi, &c_w, &g, &d, 1.0).unwrap();
        let mut want = 0.0;
        for (k, f) in r.fim.iter().enumerate() {
            let psi = gather(&d.psi_mu(k), &idx);
            want += (&psi * hpd_inverse(f).unwrap() * psi.adjoint()).trace().re;
        }
        assert!((r.bound - want).abs() < 1e-9 * want);
    }

    #[test]
    fn significant_gamma_thresholds() {
        assert_eq!(significant_gamma(&[10.0, 0.1, 0.05, 0.0], 0.01), vec![10.0, 0.0, 0.0, 0.0]);
        assert_eq!(significant_gamma(&[1.0, 0.5], 0.01), vec![1.0, 0.5]);
    }

    #[test]
    fn rejects_empty_support() {
        let (d, xi, c_w) = setup(4);
        assert!(bcrb(&xi, &c_w, &vec![0.0; d.columns()], &d, 1.0).is_err());
    }
}
