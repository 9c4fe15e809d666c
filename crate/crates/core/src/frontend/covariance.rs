//! Noise covariances of the quantized receive chains.

use crate::error::{Error, Result};
use crate::linalg::{hermitian_deviation, min_eigenvalue, CMat, C64};

/// `Q = Σ_u Σ_n H_u(n) R_xx,u H_u(n)^H` over users and the channel taps.
///
/// `taps[n]` is `N_R × U·N_Tu`; `r_xx[u]` is the `N_Tu × N_Tu` transmit
/// covariance of user `u`.
pub fn signal_covariance_q(taps: &[CMat], r_xx: &[CMat]) -> Result<CMat> {
    let first = taps.first().ok_or_else(|| Error::input("no channel taps"))?;
    let (nr, nt) = first.shape();
    let u = r_xx.len();
    if u == 0 || nt % u != 0 {
        return Err(Error::input(format!("{nt} transmit columns cannot be split over {u} users")));
    }
    let ntu = nt / u;
    if r_xx.iter().any(|r| r.shape() != (ntu, ntu)) || taps.iter().any(|t| t.shape() != (nr, nt)) {
        return Err(Error::input("tap or transmit-covariance dimension mismatch"));
    }
    let mut q = CMat::zeros(nr, nr);
    for h in taps {
        for (ui, r) in r_xx.iter().enumerate() {
            let hu = h.columns(ui * ntu, ntu);
            let t = hu * r;
            q.gemm(C64::new(1.0, 0.0), &t, &hu.adjoint(), C64::new(1.0, 0.0));
        }
    }
    Ok(q)
}

/// `C_m = ε(1−ε)·diag(W^H Q W + σ² W^H W)`.
pub fn quantizer_noise_covariance(w_rf: &CMat, q: &CMat, noise_var: f64, eps: f64) -> CMat {
    let n = w_rf.ncols();
    let scale = eps * (1.0 - eps);
    let mut c = CMat::zeros(n, n);
    if scale == 0.0 {
        return c;
    }
    for i in 0..n {
        let wi = w_rf.column(i);
        let quad = (wi.adjoint() * q * wi)[(0, 0)].re + noise_var * wi.norm_squared();
        c[(i, i)] = C64::new(scale * quad, 0.0);
    }
    c
}

/// `R_vv = ε²σ² W^H W + C_m`.
pub fn effective_noise_covariance(w_rf: &CMat, c_m: &CMat, eps: f64, noise_var: f64) -> Result<CMat> {
    let n = w_rf.ncols();
    if c_m.shape() != (n, n) {
        return Err(Error::input("quantizer covariance has the wrong size"));
    }
    let scale = c_m.norm().max(f64::MIN_POSITIVE);
    if hermitian_deviation(c_m) > 1e-12 * scale || min_eigenvalue(c_m) < -1e-12 * scale {
        return Err(Error::input("quantizer covariance is not Hermitian positive semidefinite"));
    }
    let r = w_rf.adjoint() * w_rf * C64::new(eps * eps * noise_var, 0.0) + c_m;
    // Exact Hermitian symmetrization guards against round-off in the product.
    Ok((&r + r.adjoint()) * C64::new(0.5, 0.0))
}
