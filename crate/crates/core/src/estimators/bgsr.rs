//! Expectation-maximization group-sparse Bayesian regression with
//! hyperparameters shared across subcarriers.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::{cholesky, CMat, C64};

/// Hyperparameters below `PRUNE_RELATIVE · max(γ)` are set to zero.
pub const PRUNE_RELATIVE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BgsrParams {
    /// Threshold on `‖Γ^{(j)} − Γ^{(j−1)}‖_F²`.
    pub eps: f64,
    /// Iteration cap `K_max`.
    pub k_max: usize,
    pub prune_relative: f64,
}

impl Default for BgsrParams {
    fn default() -> Self {
        BgsrParams { eps: 1.0, k_max: 20, prune_relative: PRUNE_RELATIVE }
    }
}

/// E-step output: posterior means and posterior variances (diagonal of `Σ`).
#[derive(Debug, Clone)]
pub struct EStep {
    /// `n × K` posterior means.
    pub mean: CMat,
    /// `n × K` posterior variances.
    pub variance: DMatrix<f64>,
}

#[derive(Debug, Clone)]
pub struct BgsrOutput {
    pub h_b: CMat,
    pub gamma: Vec<f64>,
    /// `‖Γ^{(j+1)} − Γ^{(j)}‖_F²` after every EM iteration.
    pub trace: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

fn check_inputs(xi: &[CMat], y: &CMat, c_w: &CMat, gamma: &[f64]) -> Result<()> {
    let k = xi.len();
    if k == 0 || y.ncols() != k {
        return Err(Error::input(format!("{} sensing matrices for {} measurement columns", k, y.ncols())));
    }
    let (m, n) = xi[0].shape();
    if xi.iter().any(|x| x.shape() != (m, n)) || y.nrows() != m || c_w.shape() != (m, m) || gamma.len() != n {
        return Err(Error::input("sensing tensor, outputs, noise covariance and hyperparameters disagree in size"));
    }
    if gamma.iter().any(|g| !(*g >= 0.0) || !g.is_finite()) {
        return Err(Error::input("hyperparameters must be finite and nonnegative"));
    }
    Ok(())
}

fn active_set(gamma: &[f64]) -> Vec<usize> {
    gamma.iter().enumerate().filter(|(_, g)| **g > 0.0).map(|(i, _)| i).collect()
}

fn gather(xi: &CMat, idx: &[usize]) -> CMat {
    let m = xi.nrows();
    let mut out = CMat::zeros(m, idx.len());
    for (j, &i) in idx.iter().enumerate() {
        out.column_mut(j).copy_from(&xi.column(i));
    }
    out
}

/// Real and imaginary parts of a sensing matrix, kept apart so the inner
/// products run through real matrix multiplication.
struct SplitMatrix {
    re: DMatrix<f64>,
    im: DMatrix<f64>,
}

impl SplitMatrix {
    fn new(x: &CMat) -> Self {
        SplitMatrix { re: x.map(|z| z.re), im: x.map(|z| z.im) }
    }
}

/// `S = C_w + Ξ_A Γ_A Ξ_A^H`, `W = L^{-1} Ξ_A` and `z = L^{-1} y` for one
/// subcarrier, then the posterior mean `γ ⊙ W^H z` and variance `γ − γ² ‖w_i‖²`.
fn e_step_subcarrier(
    x: &SplitMatrix,
    y_k: &CMat,
    c_w: &CMat,
    active: &[usize],
    g: &[f64],
) -> Result<(Vec<C64>, Vec<f64>)> {
    let (m, a) = (x.re.nrows(), active.len());
    // b = [Re Ξ_A | Im Ξ_A], p = b·diag(γ, γ), q = [Im | −Re]·diag(γ, γ)
    let mut b = DMatrix::<f64>::zeros(m, 2 * a);
    let mut p = DMatrix::<f64>::zeros(m, 2 * a);
    let mut q = DMatrix::<f64>::zeros(m, 2 * a);
    for (j, &i) in active.iter().enumerate() {
        for r in 0..m {
            let (xr, xi) = (x.re[(r, i)], x.im[(r, i)]);
            b[(r, j)] = xr;
            b[(r, a + j)] = xi;
            p[(r, j)] = g[j] * xr;
            p[(r, a + j)] = g[j] * xi;
            q[(r, j)] = g[j] * xi;
            q[(r, a + j)] = -g[j] * xr;
        }
    }
    let mut s_re = c_w.map(|z| z.re);
    let mut s_im = c_w.map(|z| z.im);
    s_re.gemm(1.0, &p, &b.transpose(), 1.0);
    s_im.gemm(1.0, &q, &b.transpose(), 1.0);
    let s = CMat::from_fn(m, m, |r, c| C64::new(s_re[(r, c)], s_im[(r, c)]));
    let l = cholesky(&s)?.l();
    let linv = l
        .solve_lower_triangular(&CMat::identity(m, m))
        .ok_or_else(|| Error::Numerical("singular Cholesky factor".into()))?;
    // [Re W; Im W] = [[Re L⁻¹, −Im L⁻¹], [Im L⁻¹, Re L⁻¹]] · [Re Ξ_A; Im Ξ_A]
    let mut lin = DMatrix::<f64>::zeros(2 * m, 2 * m);
    for r in 0..m {
        for c in 0..m {
            let v = linv[(r, c)];
            lin[(r, c)] = v.re;
            lin[(r, m + c)] = -v.im;
            lin[(m + r, c)] = v.im;
            lin[(m + r, m + c)] = v.re;
        }
    }
    let mut xs = DMatrix::<f64>::zeros(2 * m, a);
    xs.view_mut((0, 0), (m, a)).copy_from(&b.columns(0, a));
    xs.view_mut((m, 0), (m, a)).copy_from(&b.columns(a, a));
    let w = lin * xs;
    let z = &linv * y_k;
    let mut mean = Vec::with_capacity(a);
    let mut var = Vec::with_capacity(a);
    for j in 0..a {
        let (mut wz, mut wn) = (C64::new(0.0, 0.0), 0.0);
        for r in 0..m {
            let wr = C64::new(w[(r, j)], w[(m + r, j)]);
            wz += wr.conj() * z[r];
            wn += wr.norm_sqr();
        }
        mean.push(wz * g[j]);
        var.push((g[j] - g[j] * g[j] * wn).max(0.0));
    }
    Ok((mean, var))
}

fn e_step_split(xs: &[SplitMatrix], y: &CMat, c_w: &CMat, gamma: &[f64]) -> Result<EStep> {
    let (n, kk) = (gamma.len(), xs.len());
    let active = active_set(gamma);
    let mut mean = CMat::zeros(n, kk);
    let mut variance = DMatrix::<f64>::zeros(n, kk);
    if active.is_empty() {
        return Ok(EStep { mean, variance });
    }
    let g: Vec<f64> = active.iter().map(|&i| gamma[i]).collect();
    for (k, x) in xs.iter().enumerate() {
        let (mk, vk) = e_step_subcarrier(x, &y.columns(k, 1).into_owned(), c_w, &active, &g)?;
        for (j, &i) in active.iter().enumerate() {
            mean[(i, k)] = mk[j];
            variance[(i, k)] = vk[j];
        }
    }
    Ok(EStep { mean, variance })
}

/// Posterior means and variances for every subcarrier under the prior
/// `CN(0, diag(γ))`.
///
/// With `S = C_w + Ξ_A Γ_A Ξ_A^H = L L^H`, `W = L^{-1} Ξ_A` and `z = L^{-1} y`,
/// the mean is `γ ⊙ W^H z` and the variance `γ − γ² ‖w_i‖²`. Entries with
/// `γ_i = 0` have zero mean and variance.
pub fn bgsr_e_step(xi: &[CMat], y: &CMat, c_w: &CMat, gamma: &[f64]) -> Result<EStep> {
    check_inputs(xi, y, c_w, gamma)?;
    let xs: Vec<SplitMatrix> = xi.iter().map(SplitMatrix::new).collect();
    e_step_split(&xs, y, c_w, gamma)
}

/// Full posterior covariance `Γ − Γ Ξ^H S^{-1} Ξ Γ` for one subcarrier.
pub fn posterior_covariance(xi_k: &CMat, c_w: &CMat, gamma: &[f64]) -> Result<CMat> {
    let n = gamma.len();
    let active = active_set(gamma);
    let mut sigma = CMat::zeros(n, n);
    if active.is_empty() {
        return Ok(sigma);
    }
    let xa = gather(xi_k, &active);
    let ga = CMat::from_diagonal(&nalgebra::DVector::from_iterator(
        active.len(),
        active.iter().map(|&i| C64::new(gamma[i], 0.0)),
    ));
    let s = c_w + &xa * &ga * xa.adjoint();
    let l = cholesky(&s)?.l();
    let w = l.solve_lower_triangular(&(&xa * &ga)).ok_or_else(|| Error::Numerical("singular Cholesky factor".into()))?;
    let sa = &ga - w.ad_mul(&w);
    for (a, &i) in active.iter().enumerate() {
        for (b, &j) in active.iter().enumerate() {
            sigma[(i, j)] = sa[(a, b)];
        }
    }
    Ok(sigma)
}

/// Per-subcarrier `Γ_k = diag(Σ_k) + |ĥ_k|²`, averaged over subcarriers.
pub fn bgsr_m_step(e: &EStep) -> Vec<f64> {
    let (n, kk) = e.mean.shape();
    (0..n)
        .map(|i| (0..kk).map(|k| e.variance[(i, k)] + e.mean[(i, k)].norm_sqr()).sum::<f64>() / kk as f64)
        .collect()
}

fn prune(gamma: &mut [f64], rel: f64) {
    let max = gamma.iter().cloned().fold(0.0, f64::max);
    let floor = rel * max;
    for g in gamma.iter_mut() {
        if *g < floor || *g <= 0.0 {
            *g = 0.0;
        }
    }
}

fn diff2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Alternates E and M steps from `Γ = I` until `‖Γ^{(j)} − Γ^{(j−1)}‖_F² ≤ ε`
/// or `j = K_max`.
pub fn bgsr_estimate(xi: &[CMat], y: &CMat, c_w: &CMat, params: &BgsrParams) -> Result<BgsrOutput> {
    if !(params.eps > 0.0) || params.k_max == 0 {
        return Err(Error::input("BGSR needs eps > 0 and k_max >= 1"));
    }
    let n = xi.first().map(|x| x.ncols()).unwrap_or(0);
    let mut gamma = vec![1.0; n];
    let mut prev = vec![0.0; n];
    check_inputs(xi, y, c_w, &gamma)?;
    let xs: Vec<SplitMatrix> = xi.iter().map(SplitMatrix::new).collect();
    let mut h_b = CMat::zeros(n, xi.len());
    let mut trace = Vec::new();
    let mut j = 1;
    while diff2(&gamma, &prev) > params.eps && j < params.k_max {
        let e = e_step_split(&xs, y, c_w, &gamma)?;
        let mut next = bgsr_m_step(&e);
        prune(&mut next, params.prune_relative);
        h_b = e.mean;
        trace.push(diff2(&next, &gamma));
        prev = std::mem::replace(&mut gamma, next);
        j += 1;
    }
    let converged = diff2(&gamma, &prev) <= params.eps;
    Ok(BgsrOutput { h_b, gamma, trace, iterations: j - 1, converged })
}

/// `log p(y_k; Γ) = −m log π − log det S − y^H S^{-1} y` with `S = C_w + Ξ Γ Ξ^H`.
pub fn log_marginal_likelihood(xi_k: &CMat, y_k: &CMat, c_w: &CMat, gamma: &[f64]) -> Result<f64> {
    let active = active_set(gamma);
    let xa = gather(xi_k, &active);
    let mut scaled = xa.clone();
    for (j, &i) in active.iter().enumerate() {
        scaled.column_mut(j).scale_mut(gamma[i]);
    }
    let s = c_w + scaled * xa.adjoint();
    let l = cholesky(&s)?.l();
    let logdet: f64 = 2.0 * (0..l.nrows()).map(|i| l[(i, i)].re.ln()).sum::<f64>();
    let z = l.solve_lower_triangular(y_k).ok_or_else(|| Error::Numerical("singular Cholesky factor".into()))?;
    let m = c_w.nrows() as f64;
    Ok(-m * std::f64::consts::PI.ln() - logdet - z.norm_squared())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{crandn, crandn_mat, frob2, hermitian_deviation, hpd_inverse, min_eigenvalue};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn instance(m: usize, n: usize, kk: usize, seed: u64) -> (Vec<CMat>, CMat, CMat, Vec<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let xi: Vec<CMat> = (0..kk).map(|_| crandn_mat(m, n, &mut rng) / C64::new((m as f64).sqrt(), 0.0)).collect();
        let y = crandn_mat(m, kk, &mut rng);
        let b = crandn_mat(m, m, &mut rng);
        let c_w = &b * b.adjoint() * C64::new(0.05, 0.0) + CMat::identity(m, m) * C64::new(0.1, 0.0);
        let gamma: Vec<f64> = (0..n).map(|_| rng.random_range(0.1..3.0)).collect();
        (xi, y, c_w, gamma)
    }

    #[test]
    fn woodbury_matches_direct_inverse() {
        let (xi, y, c_w, gamma) = instance(12, 30, 3, 1);
        let e = bgsr_e_step(&xi, &y, &c_w, &gamma).unwrap();
        let cinv = hpd_inverse(&c_w).unwrap();
        for k in 0..3 {
            let ginv = CMat::from_diagonal(&nalgebra::DVector::from_iterator(30, gamma.iter().map(|g| C64::new(1.0 / g, 0.0))));
            let direct = hpd_inverse(&(xi[k].adjoint() * &cinv * &xi[k] + ginv)).unwrap();
            let sigma = posterior_covariance(&xi[k], &c_w, &gamma).unwrap();
            assert!((frob2(&(&sigma - &direct)) / frob2(&direct)).sqrt() < 1e-8);
            let mean = &direct * xi[k].adjoint() * &cinv * y.column(k);
            let got = e.mean.column(k);
            assert!((got - &mean).norm() / mean.norm() < 1e-8);
            for i in 0..30 {
                assert!((e.variance[(i, k)] - direct[(i, i)].re).abs() < 1e-8 * direct[(i, i)].re);
            }
            assert!(hermitian_deviation(&sigma) < 1e-10);
            assert!(min_eigenvalue(&sigma) > -1e-10);
        }
    }

    #[test]
    fn scalar_closed_form() {
        let n = 5;
        let xi = vec![CMat::identity(n, n)];
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let y = CMat::from_fn(n, 1, |_, _| crandn(&mut rng));
        let s2 = 0.3;
        let c_w = CMat::identity(n, n) * C64::new(s2, 0.0);
        let gamma = vec![0.5, 1.0, 2.0, 0.1, 4.0];
        let e = bgsr_e_step(&xi, &y, &c_w, &gamma).unwrap();
        for i in 0..n {
            let want = y[(i, 0)] * (gamma[i] / (gamma[i] + s2));
            assert!((e.mean[(i, 0)] - want).norm() < 1e-12);
        }
    }

    #[test]
    fn zero_prior_gives_zero_mean() {
        let (xi, y, c_w, _) = instance(6, 10, 2, 3);
        let e = bgsr_e_step(&xi, &y, &c_w, &[0.0; 10]).unwrap();
        assert!(e.mean.iter().all(|z| *z == C64::new(0.0, 0.0)));
        let mut g = vec![1.0; 10];
        g[4] = 0.0;
        let e = bgsr_e_step(&xi, &y, &c_w, &g).unwrap();
        assert_eq!(e.mean[(4, 0)], C64::new(0.0, 0.0));
        assert_eq!(e.variance[(4, 1)], 0.0);
        let sigma = posterior_covariance(&xi[0], &c_w, &g).unwrap();
        assert!(sigma.row(4).iter().chain(sigma.column(4).iter()).all(|z| z.norm() == 0.0));
    }

    #[test]
    fn m_step_averages() {
        let e = EStep {
            mean: CMat::from_row_slice(2, 2, &[C64::new(1.0, 1.0), C64::new(0.0, 2.0), C64::new(3.0, 0.0), C64::new(0.0, 0.0)]),
            variance: DMatrix::from_row_slice(2, 2, &[0.5, 0.25, 1.0, 2.0]),
        };
        let g = bgsr_m_step(&e);
        assert!((g[0] - ((0.5 + 2.0) + (0.25 + 4.0)) / 2.0).abs() < 1e-15);
        assert!((g[1] - ((1.0 + 9.0) + 2.0) / 2.0).abs() < 1e-15);
        let single = EStep { mean: CMat::zeros(3, 1), variance: DMatrix::from_element(3, 1, 0.7) };
        assert_eq!(bgsr_m_step(&single), vec![0.7; 3]);
    }

    #[test]
    fn planted_atom_dominates() {
        let (m, n, kk) = (16, 40, 4);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let xi: Vec<CMat> = (0..kk).map(|_| crandn_mat(m, n, &mut rng) / C64::new((m as f64).sqrt(), 0.0)).collect();
        let truth = 17;
        let y = CMat::from_fn(m, kk, |r, k| xi[k][(r, truth)] * C64::new(2.0, -1.0));
        let c_w = CMat::identity(m, m) * C64::new(1e-8, 0.0);
        let out = bgsr_estimate(&xi, &y, &c_w, &BgsrParams { eps: 1e-10, k_max: 200, ..Default::default() }).unwrap();
        let peak = out.gamma.iter().cloned().fold(0.0, f64::max);
        assert_eq!(out.gamma[truth], peak);
        for (i, g) in out.gamma.iter().enumerate() {
            if i != truth {
                assert!(*g < 1e-3 * peak);
            }
        }
    }

    #[test]
    fn halts_within_cap_and_is_permutation_invariant() {
        let (xi, y, c_w, _) = instance(10, 24, 4, 5);
        let p = BgsrParams::default();
        let out = bgsr_estimate(&xi, &y, &c_w, &p).unwrap();
        assert!(out.iterations < p.k_max);
        assert!(out.trace.iter().all(|t| t.is_finite()));
        let order = [2, 0, 3, 1];
        let xi_p: Vec<CMat> = order.iter().map(|&k| xi[k].clone()).collect();
        let y_p = CMat::from_fn(10, 4, |r, c| y[(r, order[c])]);
        let out_p = bgsr_estimate(&xi_p, &y_p, &c_w, &p).unwrap();
        for (a, b) in out.gamma.iter().zip(&out_p.gamma) {
            assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
        }
    }

    #[test]
    fn em_likelihood_monotone_single_subcarrier() {
        let (xi, y, c_w, _) = instance(12, 30, 1, 6);
        let mut gamma = vec![1.0; 30];
        let mut prev = log_marginal_likelihood(&xi[0], &y, &c_w, &gamma).unwrap();
        for _ in 0..30 {
            let e = bgsr_e_step(&xi, &y, &c_w, &gamma).unwrap();
            gamma = bgsr_m_step(&e);
            let cur = log_marginal_likelihood(&xi[0], &y, &c_w, &gamma).unwrap();
            assert!(cur >= prev - 1e-9, "{cur} < {prev}");
            prev = cur;
        }
    }
}
