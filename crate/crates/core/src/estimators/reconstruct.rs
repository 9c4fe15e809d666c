//! Mapping beamspace coefficients back to the per-subcarrier channel.

use crate::channel::steering::steering_from_cosine;
use crate::dictionary::{DictionaryMode, SparsifyingDictionary};
use crate::error::{Error, Result};
use crate::linalg::{CMat, C64};

/// Coefficient block of user `u` on subcarrier `k` as a `G_R′ × G_Tu′` matrix.
fn user_block(h_b: &CMat, dict: &SparsifyingDictionary, u: usize, k: usize) -> CMat {
    let (gr, gt) = (dict.rx_atoms(), dict.tx_atoms());
    let off = u * dict.atoms_per_user();
    CMat::from_fn(gr, gt, |r, t| h_b[(off + t * gr + r, k)])
}

/// `Ĥ_u[k] = A_R[k] X_u[k] A_T[k]^H` for every user, side by side.
///
/// In TBoD mode a base atom with coefficient `c` whose derivative partners
/// carry `c_R`, `c_T` with `|c_R / c|, |c_T / c| ≤ 1` is replaced by a single
/// steering pair at the shifted angles `φ + Δφ Re(c_R / c)` and
/// `θ + Δθ Re(c_T / c)`. Other coefficients keep their linear contribution.
pub fn reconstruct_channel(h_b: &CMat, dict: &SparsifyingDictionary) -> Result<Vec<CMat>> {
    let kk = dict.subcarriers();
    if h_b.nrows() != dict.columns() || h_b.ncols() != kk {
        return Err(Error::input(format!(
            "beamspace estimate is {}×{}, dictionary expects {}×{}",
            h_b.nrows(),
            h_b.ncols(),
            dict.columns(),
            kk
        )));
    }
    let (n_r, n_t) = (dict.a_r[0].nrows(), dict.a_t[0].nrows());
    let uu = dict.num_users;
    let mut out = Vec::with_capacity(kk);
    for k in 0..kk {
        let mut h = CMat::zeros(n_r, uu * n_t);
        for u in 0..uu {
            let x = user_block(h_b, dict, u, k);
            let mut hu = &dict.a_r[k] * &x * dict.a_t[k].adjoint();
            if dict.mode == DictionaryMode::Tbod {
                fold_offsets(&mut hu, &x, dict, k);
            }
            h.columns_mut(u * n_t, n_t).copy_from(&hu);
        }
        out.push(h);
    }
    Ok(out)
}

fn fold_offsets(hu: &mut CMat, x: &CMat, dict: &SparsifyingDictionary, k: usize) {
    let (gr, gt) = (dict.grid_r.len(), dict.grid_t.len());
    let (dr, dt) = (dict.grid_r.max_offset(), dict.grid_t.max_offset());
    let (a_r, a_t) = (&dict.a_r[k], &dict.a_t[k]);
    let (n_r, n_t) = (a_r.nrows(), a_t.nrows());
    let rho = dict.rho[k];
    for t in 0..gt {
        for r in 0..gr {
            let c = x[(r, t)];
            if c.norm() == 0.0 {
                continue;
            }
            let (c_r, c_t, c_rt) = (x[(r + gr, t)], x[(r, t + gt)], x[(r + gr, t + gt)]);
            let (q_r, q_t) = (c_r / c, c_t / c);
            if q_r.norm() > 1.0 || q_t.norm() > 1.0 {
                continue;
            }
            let linear = (a_r.column(r) * c + a_r.column(r + gr) * c_r) * a_t.column(t).adjoint()
                + (a_r.column(r) * c_t + a_r.column(r + gr) * c_rt) * a_t.column(t + gt).adjoint();
            let phi = dict.grid_r.cosines[r].clamp(-1.0, 1.0).acos() + dr * q_r.re;
            let theta = dict.grid_t.cosines[t].clamp(-1.0, 1.0).acos() + dt * q_t.re;
            let ar = steering_from_cosine(phi.cos(), rho, n_r);
            let at = steering_from_cosine(theta.cos(), rho, n_t);
            *hu -= linear;
            *hu += ar * C64::new(1.0, 0.0) * c * at.adjoint();
        }
    }
}
