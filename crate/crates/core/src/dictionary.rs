//! Angular grids, subcarrier-dependent array manifolds and the sensing tensor.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::channel::steering::{steering_from_cosine, subcarrier_frequencies};
use crate::config::ScenarioConfig;
use crate::error::{Error, Result};
use crate::frontend::MeasurementSet;
use crate::linalg::{blkdiag, CMat, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DictionaryMode {
    OnGrid,
    /// Base atoms augmented with scaled angular derivatives.
    Tbod,
}

/// Grid whose directional cosines are `(2/G)(r−1) − 1`, `r = 1..G`.
#[derive(Debug, Clone, PartialEq)]
pub struct AngularGrid {
    pub cosines: Vec<f64>,
}

impl AngularGrid {
    pub fn new(g: usize) -> Result<Self> {
        if g == 0 {
            return Err(Error::input("angular grid needs at least one point"));
        }
        Ok(AngularGrid { cosines: (0..g).map(|r| 2.0 * r as f64 / g as f64 - 1.0).collect() })
    }

    pub fn len(&self) -> usize {
        self.cosines.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cosines.is_empty()
    }

    /// Grid angles in radians, in `(0, π]`.
    pub fn angles(&self) -> Vec<f64> {
        self.cosines.iter().map(|c| c.acos()).collect()
    }

    /// Largest interpolation offset used by the derivative atoms.
    pub fn max_offset(&self) -> f64 {
        PI / self.len() as f64
    }
}

pub fn build_angular_grids(g_r: usize, g_t: usize) -> Result<(AngularGrid, AngularGrid)> {
    Ok((AngularGrid::new(g_r)?, AngularGrid::new(g_t)?))
}

/// Manifold with column `r` equal to the steering vector of grid point `r`.
pub fn build_manifold(grid: &AngularGrid, f_k: f64, n: usize, f_c: f64) -> CMat {
    let rho = f_k / f_c;
    let mut a = CMat::zeros(n, grid.len());
    for (r, &c) in grid.cosines.iter().enumerate() {
        a.set_column(r, &steering_from_cosine(c, rho, n));
    }
    a
}

/// `[A, Δφ·∂A/∂φ]` with `Δφ = delta`.
pub fn build_tbod(grid: &AngularGrid, f_k: f64, n: usize, f_c: f64, delta: f64) -> CMat {
    let g = grid.len();
    let rho = f_k / f_c;
    let base = build_manifold(grid, f_k, n, f_c);
    let mut out = CMat::zeros(n, 2 * g);
    out.columns_mut(0, g).copy_from(&base);
    for (r, &c) in grid.cosines.iter().enumerate() {
        let sin = (1.0 - c * c).max(0.0).sqrt();
        for i in 0..n {
            out[(i, g + r)] = base[(i, r)] * C64::new(0.0, PI * i as f64 * rho * sin * delta);
        }
    }
    out
}

/// Per-subcarrier receive and transmit manifolds shared by all users.
#[derive(Debug, Clone)]
pub struct SparsifyingDictionary {
    pub mode: DictionaryMode,
    pub grid_r: AngularGrid,
    pub grid_t: AngularGrid,
    /// `K` matrices `N_R × G_R′`.
    pub a_r: Vec<CMat>,
    /// `K` matrices `N_Tu × G_Tu′`; every user has the same array and grid.
    pub a_t: Vec<CMat>,
    /// `f_k / f_c` per subcarrier.
    pub rho: Vec<f64>,
    pub num_users: usize,
}

impl SparsifyingDictionary {
    pub fn new(cfg: &ScenarioConfig, mode: DictionaryMode) -> Result<Self> {
        let (grid_r, grid_t) = build_angular_grids(cfg.grid_rx, cfg.grid_tx)?;
        let freqs = subcarrier_frequencies(cfg);
        let fc = cfg.carrier_hz;
        let (a_r, a_t) = freqs
            .iter()
            .map(|&f| match mode {
                DictionaryMode::OnGrid => (
                    build_manifold(&grid_r, f, cfg.rx_antennas, fc),
                    build_manifold(&grid_t, f, cfg.tx_antennas_per_user, fc),
                ),
                DictionaryMode::Tbod => (
                    build_tbod(&grid_r, f, cfg.rx_antennas, fc, grid_r.max_offset()),
                    build_tbod(&grid_t, f, cfg.tx_antennas_per_user, fc, grid_t.max_offset()),
                ),
            })
            .unzip();
        let rho = freqs.iter().map(|f| f / fc).collect();
        Ok(SparsifyingDictionary { mode, grid_r, grid_t, a_r, a_t, rho, num_users: cfg.num_users })
    }

    pub fn subcarriers(&self) -> usize {
        self.a_r.len()
    }

    /// `G_R′` (grid size, doubled in TBoD mode).
    pub fn rx_atoms(&self) -> usize {
        self.a_r[0].ncols()
    }

    pub fn tx_atoms(&self) -> usize {
        self.a_t[0].ncols()
    }

    pub fn atoms_per_user(&self) -> usize {
        self.rx_atoms() * self.tx_atoms()
    }

    /// Total beamspace dimension `U·G_R′·G_Tu′`.
    pub fn columns(&self) -> usize {
        self.num_users * self.atoms_per_user()
    }

    pub fn column_index(&self, u: usize, t: usize, r: usize) -> usize {
        u * self.atoms_per_user() + t * self.rx_atoms() + r
    }

    /// Inverse of [`Self::column_index`]: `(u, t, r)`.
    pub fn decode(&self, i: usize) -> (usize, usize, usize) {
        let per = self.atoms_per_user();
        let (u, rem) = (i / per, i % per);
        (u, rem / self.rx_atoms(), rem % self.rx_atoms())
    }

    /// `conj(A_T[k]) ⊗ A_R[k]` for one user.
    pub fn psi_user(&self, k: usize) -> CMat {
        self.a_t[k].map(|z| z.conj()).kronecker(&self.a_r[k])
    }

    /// Block-diagonal multi-user dictionary `Ψ_MU[k]`.
    pub fn psi_mu(&self, k: usize) -> CMat {
        let blocks = vec![self.psi_user(k); self.num_users];
        blkdiag(&blocks)
    }
}

/// Block-diagonal concatenation of per-user Kronecker dictionaries.
pub fn build_mu_dictionary(a_t: &[CMat], a_r: &CMat) -> Result<CMat> {
    if a_t.is_empty() {
        return Err(Error::input("no transmit manifolds"));
    }
    let blocks: Vec<CMat> = a_t.iter().map(|t| t.map(|z| z.conj()).kronecker(a_r)).collect();
    Ok(blkdiag(&blocks))
}

fn check_dims(meas: &MeasurementSet, dict: &SparsifyingDictionary) -> Result<()> {
    let nt = meas.s[0][0].len();
    if meas.subcarriers() != dict.subcarriers()
        || meas.dw[0].ncols() != dict.a_r[0].nrows()
        || nt != dict.num_users * dict.a_t[0].nrows()
    {
        return Err(Error::input("measurement operators and dictionary dimensions disagree"));
    }
    Ok(())
}

/// `Ξ_MU(:,:,k)`: the blocks `Λ_{m,MU}[k]·Ψ_MU[k]` stacked over `m`.
///
/// Uses `(s_u^T ⊗ DW^H)(conj(A_T) ⊗ A_R) = (s_u^T conj(A_T)) ⊗ (DW^H A_R)`.
pub fn build_sensing_tensor(meas: &MeasurementSet, dict: &SparsifyingDictionary) -> Result<Vec<CMat>> {
    check_dims(meas, dict)?;
    let (nrf, blocks) = (meas.rf_chains(), meas.blocks());
    let (gr, gt, ntu) = (dict.rx_atoms(), dict.tx_atoms(), dict.a_t[0].nrows());
    let mut out = Vec::with_capacity(dict.subcarriers());
    for k in 0..dict.subcarriers() {
        let mut xi = CMat::zeros(blocks * nrf, dict.columns());
        let at_conj = dict.a_t[k].map(|z| z.conj());
        for m in 0..blocks {
            let b = &meas.dw[m] * &dict.a_r[k];
            for u in 0..dict.num_users {
                let su = meas.s[m][k].rows(u * ntu, ntu);
                let trow = su.transpose() * &at_conj;
                for t in 0..gt {
                    let w = trow[(0, t)];
                    let col0 = dict.column_index(u, t, 0);
                    let mut dst = xi.view_mut((m * nrf, col0), (nrf, gr));
                    dst.zip_apply(&b, |d, s| *d = s * w);
                }
            }
        }
        out.push(xi);
    }
    Ok(out)
}

/// Reference construction of the sensing tensor through explicit `Λ·Ψ` products.
pub fn build_sensing_tensor_direct(meas: &MeasurementSet, dict: &SparsifyingDictionary) -> Result<Vec<CMat>> {
    check_dims(meas, dict)?;
    let nrf = meas.rf_chains();
    Ok((0..dict.subcarriers())
        .map(|k| {
            let psi = dict.psi_mu(k);
            let mut xi = CMat::zeros(meas.blocks() * nrf, psi.ncols());
            for m in 0..meas.blocks() {
                xi.view_mut((m * nrf, 0), (nrf, psi.ncols())).copy_from(&(meas.lambda(m, k) * &psi));
            }
            xi
        })
        .collect())
}
