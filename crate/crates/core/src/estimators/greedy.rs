//! Greedy pursuits: simultaneous GSMP over all subcarriers and per-subcarrier OMP.

use crate::error::{Error, Result};
use crate::linalg::{CMat, C64};

/// Relative threshold on the `R` diagonal of the restricted QR below which a
/// candidate set is treated as rank deficient.
const RANK_TOLERANCE: f64 = 1e-10;

/// Correlations below this fraction of `‖Y‖²` count as zero.
const ZERO_CORRELATION: f64 = 1e-28;

#[derive(Debug, Clone)]
pub struct GreedyOutput {
    /// `n × K` coefficients, nonzero only on `support`.
    pub h_b: CMat,
    pub support: Vec<usize>,
    pub iterations: usize,
    /// `‖y_k − Ξ_k,A ĥ_k‖²` for every iteration (rows) and subcarrier (columns),
    /// before any division by `K`.
    pub residuals: Vec<Vec<f64>>,
    /// Set when a candidate was dropped because the restricted LS was rank deficient.
    pub degenerate: bool,
}

fn gather(xi: &CMat, idx: &[usize]) -> CMat {
    let mut out = CMat::zeros(xi.nrows(), idx.len());
    for (j, &i) in idx.iter().enumerate() {
        out.column_mut(j).copy_from(&xi.column(i));
    }
    out
}

/// Least squares `argmin ‖y − X c‖` through a thin QR, or `None` when `X`
/// is numerically rank deficient.
fn restricted_ls(x: &CMat, y: &CMat) -> Option<CMat> {
    let scale = x.column_iter().map(|c| c.norm()).fold(0.0, f64::max);
    if x.ncols() > x.nrows() || scale == 0.0 {
        return None;
    }
    let qr = x.clone().qr();
    let r = qr.r();
    if (0..r.ncols()).any(|i| r[(i, i)].norm() <= RANK_TOLERANCE * scale) {
        return None;
    }
    let qty = qr.q().ad_mul(y);
    r.solve_upper_triangular(&qty)
}

fn check(xi: &[CMat], y: &CMat) -> Result<(usize, usize)> {
    let kk = xi.len();
    if kk == 0 || y.ncols() != kk {
        return Err(Error::input(format!("{} sensing matrices for {} measurement columns", kk, y.ncols())));
    }
    let (m, n) = xi[0].shape();
    if xi.iter().any(|x| x.shape() != (m, n)) || y.nrows() != m {
        return Err(Error::input("sensing tensor and measurements disagree in size"));
    }
    Ok((m, n))
}

/// Simultaneous pursuit with atoms selected by correlation summed over subcarriers.
///
/// The residual is divided by `K` after each update and the loop runs while the
/// change in residual energy is at least `eps0`.
pub fn gsmp_estimate(xi: &[CMat], y: &CMat, eps0: f64) -> Result<GreedyOutput> {
    if !(eps0 > 0.0) {
        return Err(Error::input("GSMP needs eps0 > 0"));
    }
    let (m, n) = check(xi, y)?;
    let kk = xi.len();
    let mut support: Vec<usize> = Vec::new();
    let mut h_b = CMat::zeros(n, kk);
    let mut t = y.clone();
    let mut prev_energy = 0.0;
    let y_energy = y.norm_squared();
    let mut energy = y_energy;
    let mut residuals = Vec::new();
    let mut degenerate = false;
    let mut selected = vec![false; n];
    while (prev_energy - energy).abs() >= eps0 && support.len() < m {
        let mut score = vec![0.0; n];
        for (k, x) in xi.iter().enumerate() {
            let z = x.ad_mul(&t.column(k));
            for (s, zi) in score.iter_mut().zip(z.iter()) {
                *s += zi.norm_sqr();
            }
        }
        let best = (0..n).filter(|i| !selected[*i]).max_by(|a, b| score[*a].total_cmp(&score[*b]));
        let Some(best) = best.filter(|b| score[*b] > ZERO_CORRELATION * y_energy) else { break };
        support.push(best);
        let mut coeffs = Vec::with_capacity(kk);
        let mut resid = CMat::zeros(m, kk);
        let mut norms = Vec::with_capacity(kk);
        for (k, x) in xi.iter().enumerate() {
            let xa = gather(x, &support);
            let yk = y.columns(k, 1).into_owned();
            let Some(c) = restricted_ls(&xa, &yk) else { break };
            let r = &yk - &xa * &c;
            norms.push(r.norm_squared());
            resid.set_column(k, &r.column(0));
            coeffs.push(c);
        }
        if coeffs.len() < kk {
            support.pop();
            degenerate = true;
            break;
        }
        selected[best] = true;
        h_b.fill(C64::new(0.0, 0.0));
        for (k, c) in coeffs.iter().enumerate() {
            for (j, &i) in support.iter().enumerate() {
                h_b[(i, k)] = c[j];
            }
        }
        residuals.push(norms);
        t = resid / C64::new(kk as f64, 0.0);
        prev_energy = energy;
        energy = t.norm_squared();
    }
    Ok(GreedyOutput { h_b, iterations: residuals.len(), support, residuals, degenerate })
}

/// Orthogonal matching pursuit on one subcarrier; stops once the residual
/// energy is at most `tol` or `max_atoms` atoms are selected.
pub fn omp_per_subcarrier(xi_k: &CMat, y_k: &CMat, max_atoms: usize, tol: f64) -> Result<GreedyOutput> {
    let (m, n) = check(std::slice::from_ref(xi_k), y_k)?;
    if max_atoms > m {
        return Err(Error::input(format!("max_atoms {max_atoms} exceeds {m} measurement rows")));
    }
    let mut support = Vec::new();
    let mut h_b = CMat::zeros(n, 1);
    let mut r = y_k.clone();
    let y_energy = y_k.norm_squared();
    let mut residuals = Vec::new();
    let mut degenerate = false;
    let mut selected = vec![false; n];
    while r.norm_squared() > tol && support.len() < max_atoms {
        let z = xi_k.ad_mul(&r);
        let best = (0..n).filter(|i| !selected[*i]).max_by(|a, b| z[*a].norm_sqr().total_cmp(&z[*b].norm_sqr()));
        let Some(best) = best.filter(|b| z[*b].norm_sqr() > ZERO_CORRELATION * y_energy) else { break };
        support.push(best);
        let xa = gather(xi_k, &support);
        let Some(c) = restricted_ls(&xa, y_k) else {
            support.pop();
            degenerate = true;
            break;
        };
        selected[best] = true;
        r = y_k - &xa * &c;
        h_b.fill(C64::new(0.0, 0.0));
        for (j, &i) in support.iter().enumerate() {
            h_b[(i, 0)] = c[j];
        }
        residuals.push(vec![r.norm_squared()]);
    }
    Ok(GreedyOutput { h_b, iterations: residuals.len(), support, residuals, degenerate })
}
