//! Small complex linear-algebra helpers shared by the estimators.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

pub const J: C64 = C64::new(0.0, 1.0);

/// Relative jitter applied to the diagonal when a Cholesky factorization fails.
pub const CHOLESKY_JITTER: f64 = 1e-12;

/// Draws one sample of a circularly-symmetric complex normal with unit variance.
pub fn crandn<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn crandn_vec<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CVec {
    CVec::from_fn(n, |_, _| crandn(rng))
}

pub fn crandn_mat<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMat {
    CMat::from_fn(rows, cols, |_, _| crandn(rng))
}

/// Squared Frobenius norm.
pub fn frob2(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum()
}

/// Frobenius norm of `a - a^H`.
pub fn hermitian_deviation(a: &CMat) -> f64 {
    (a - a.adjoint()).norm()
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

/// Block-diagonal concatenation.
pub fn blkdiag(blocks: &[CMat]) -> CMat {
    let rows = blocks.iter().map(|b| b.nrows()).sum();
    let cols = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = CMat::zeros(rows, cols);
    let (mut r0, mut c0) = (0, 0);
    for b in blocks {
        out.view_mut((r0, c0), (b.nrows(), b.ncols())).copy_from(b);
        r0 += b.nrows();
        c0 += b.ncols();
    }
    out
}

/// Cholesky factorization of a Hermitian positive-definite matrix.
///
/// On failure, `CHOLESKY_JITTER * trace / n` is added to the diagonal and the
/// factorization retried, escalating the jitter by 100x up to three times.
pub fn cholesky(a: &CMat) -> Result<Cholesky<C64, Dyn>> {
    if let Some(c) = try_cholesky(a.clone()) {
        return Ok(c);
    }
    let n = a.nrows().max(1);
    let trace: f64 = (0..a.nrows()).map(|i| a[(i, i)].re).sum::<f64>().abs();
    let mut jitter = CHOLESKY_JITTER * trace.max(f64::MIN_POSITIVE) / n as f64;
    for _ in 0..3 {
        let mut b = a.clone();
        for i in 0..b.nrows() {
            b[(i, i)] += jitter;
        }
        if let Some(c) = try_cholesky(b) {
            return Ok(c);
        }
        jitter *= 100.0;
    }
    let diag: Vec<f64> = (0..a.nrows()).map(|i| a[(i, i)].re).collect();
    let max = diag.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = diag.iter().cloned().fold(f64::INFINITY, f64::min);
    Err(Error::Numerical(format!(
        "Cholesky failed for {}x{} system (diagonal range [{min:.3e}, {max:.3e}], \
         hermitian deviation {:.3e})",
        a.nrows(),
        a.ncols(),
        hermitian_deviation(a)
    )))
}

// The complex square root never fails, so positivity of the pivots is checked
// here: a pivot is accepted when its square has positive real part.
fn try_cholesky(mut a: CMat) -> Option<Cholesky<C64, Dyn>> {
    for i in 0..a.nrows().min(a.ncols()) {
        a[(i, i)].im = 0.0;
    }
    let c = a.cholesky()?;
    let l = c.l_dirty();
    let ok = (0..l.nrows()).all(|i| {
        let d = l[(i, i)];
        d.re > 0.0 && d.re.is_finite() && d.im.abs() < d.re
    });
    ok.then_some(c)
}

/// Inverse of a Hermitian positive-definite matrix.
pub fn hpd_inverse(a: &CMat) -> Result<CMat> {
    Ok(cholesky(a)?.inverse())
}

/// Smallest eigenvalue of a Hermitian matrix.
pub fn min_eigenvalue(a: &CMat) -> f64 {
    let herm = (a + a.adjoint()) * C64::new(0.5, 0.0);
    herm.symmetric_eigenvalues()
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min)
}

/// Real diagonal of a square complex matrix.
pub fn real_diagonal(a: &CMat) -> Vec<f64> {
    (0..a.nrows().min(a.ncols())).map(|i| a[(i, i)].re).collect()
}

pub fn real_to_complex(v: &DVector<f64>) -> CVec {
    v.map(|x| C64::new(x, 0.0))
}
