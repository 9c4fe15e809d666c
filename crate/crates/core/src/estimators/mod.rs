//! Sparse beamspace channel estimators and channel reconstruction.

pub mod bgsr;
pub mod greedy;
pub mod reconstruct;

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

pub use bgsr::{bgsr_e_step, bgsr_estimate, bgsr_m_step, posterior_covariance, BgsrOutput, BgsrParams, EStep};
pub use greedy::{gsmp_estimate, omp_per_subcarrier, GreedyOutput};
pub use reconstruct::reconstruct_channel;

use crate::dictionary::SparsifyingDictionary;
use crate::error::{Error, Result};
use crate::linalg::CMat;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Bgsr,
    Gsmp,
    Omp,
    Sbl,
    /// Perfect channel knowledge.
    Genie,
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] = [Algorithm::Bgsr, Algorithm::Gsmp, Algorithm::Omp, Algorithm::Sbl, Algorithm::Genie];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Bgsr => "bgsr",
            Algorithm::Gsmp => "gsmp",
            Algorithm::Omp => "omp",
            Algorithm::Sbl => "sbl",
            Algorithm::Genie => "genie",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s.trim().to_ascii_lowercase())
            .ok_or_else(|| Error::input(format!("unknown algorithm '{s}'")))
    }
}

#[derive(Debug, Clone)]
pub struct EstimatorOutput {
    pub h_b_hat: CMat,
    /// Reconstructed channel per subcarrier, `N_R × U·N_Tu`.
    pub h_hat: Vec<CMat>,
    pub iterations: usize,
    /// Selected atoms (greedy methods) or atoms with nonzero hyperparameter.
    pub support: Vec<usize>,
    pub wall_time: f64,
    /// Per-iteration `‖ΔΓ‖_F²` for the Bayesian methods.
    pub trace: Vec<f64>,
    pub gamma: Option<Vec<f64>>,
}

/// Tuning shared by every estimator invocation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimatorSettings {
    pub bgsr: BgsrParams,
    pub gsmp_eps0: f64,
    /// OMP atom cap as a fraction of the measurement rows.
    pub omp_atom_fraction: f64,
}

impl Default for EstimatorSettings {
    fn default() -> Self {
        EstimatorSettings { bgsr: BgsrParams::default(), gsmp_eps0: 0.1, omp_atom_fraction: 0.5 }
    }
}

/// Per-subcarrier SBL: the BGSR iteration run separately on every subcarrier.
pub fn smv_sbl(xi: &[CMat], y: &CMat, c_w: &CMat, params: &BgsrParams) -> Result<Vec<BgsrOutput>> {
    if xi.len() != y.ncols() {
        return Err(Error::input("one sensing matrix per measurement column is required"));
    }
    xi.iter()
        .enumerate()
        .map(|(k, x)| bgsr_estimate(std::slice::from_ref(x), &y.columns(k, 1).into_owned(), c_w, params))
        .collect()
}

/// Runs one beamspace estimator and reconstructs its channel. `Genie` has no
/// beamspace estimate and is rejected here.
pub fn estimate(
    algorithm: Algorithm,
    xi: &[CMat],
    y: &CMat,
    c_w: &CMat,
    dict: &SparsifyingDictionary,
    settings: &EstimatorSettings,
) -> Result<EstimatorOutput> {
    let start = Instant::now();
    let n = dict.columns();
    let (h_b_hat, iterations, support, trace, gamma) = match algorithm {
        Algorithm::Bgsr => {
            let o = bgsr_estimate(xi, y, c_w, &settings.bgsr)?;
            let support = (0..n).filter(|i| o.gamma[*i] > 0.0).collect();
            (o.h_b, o.iterations, support, o.trace, Some(o.gamma))
        }
        Algorithm::Sbl => {
            let outs = smv_sbl(xi, y, c_w, &settings.bgsr)?;
            let mut h_b = CMat::zeros(n, xi.len());
            for (k, o) in outs.iter().enumerate() {
                h_b.set_column(k, &o.h_b.column(0));
            }
            let support = (0..n).filter(|i| outs.iter().any(|o| o.gamma[*i] > 0.0)).collect();
            let iterations = outs.iter().map(|o| o.iterations).max().unwrap_or(0);
            (h_b, iterations, support, Vec::new(), None)
        }
        Algorithm::Gsmp => {
            let o = gsmp_estimate(xi, y, settings.gsmp_eps0)?;
            (o.h_b, o.iterations, o.support, Vec::new(), None)
        }
        Algorithm::Omp => {
            let m = y.nrows();
            let cap = ((m as f64 * settings.omp_atom_fraction).floor() as usize).clamp(1, m);
            let tol = (0..m).map(|i| c_w[(i, i)].re).sum::<f64>();
            let mut h_b = CMat::zeros(n, xi.len());
            let mut support = Vec::new();
            let mut iterations = 0;
            for (k, x) in xi.iter().enumerate() {
                let o = omp_per_subcarrier(x, &y.columns(k, 1).into_owned(), cap, tol)?;
                h_b.set_column(k, &o.h_b.column(0));
                iterations = iterations.max(o.iterations);
                support.extend(o.support);
            }
            support.sort_unstable();
            support.dedup();
            (h_b, iterations, support, Vec::new(), None)
        }
        Algorithm::Genie => return Err(Error::input("the genie has no beamspace estimate")),
    };
    let h_hat = reconstruct_channel(&h_b_hat, dict)?;
    Ok(EstimatorOutput { h_b_hat, h_hat, iterations, support, wall_time: start.elapsed().as_secs_f64(), trace, gamma })
}
