//! Path-loss terms: spreading, molecular absorption and rough-surface reflection.

use std::f64::consts::PI;
use std::path::Path;

use num_complex::Complex64;
use serde::Deserialize;

use crate::error::{Error, Result};

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
pub const MU_0: f64 = 1.256_637_062_12e-6;
pub const EPSILON_0: f64 = 8.854_187_812_8e-12;

/// Free-space impedance `sqrt(μ0/ε0)`.
pub fn free_space_impedance() -> f64 {
    (MU_0 / EPSILON_0).sqrt()
}

/// Spreading loss `(c / (4π f d))²` as a linear power gain.
pub fn free_space_loss(f_k: f64, d: f64) -> Result<f64> {
    if !(f_k > 0.0 && d > 0.0) {
        return Err(Error::input(format!("free-space loss needs f > 0 and d > 0 (got f={f_k}, d={d})")));
    }
    Ok((SPEED_OF_LIGHT / (4.0 * PI * f_k * d)).powi(2))
}

/// Molecular absorption coefficient `k_abs(f)` in m⁻¹.
#[derive(Debug, Clone, PartialEq)]
pub enum Absorption {
    Constant(f64),
    /// Linearly interpolated table sorted by frequency.
    Table(Vec<(f64, f64)>),
}

#[derive(Deserialize)]
struct AbsorptionRow {
    freq_hz: f64,
    kabs_per_m: f64,
}

impl Absorption {
    /// Reads a `freq_hz,kabs_per_m` CSV with header.
    pub fn from_csv(path: &Path) -> Result<Self> {
        let mut rdr = csv::Reader::from_path(path)?;
        let mut rows = Vec::new();
        for rec in rdr.deserialize() {
            let r: AbsorptionRow = rec?;
            if r.kabs_per_m < 0.0 || !r.kabs_per_m.is_finite() || !r.freq_hz.is_finite() {
                return Err(Error::input(format!(
                    "absorption table {}: invalid row ({}, {})",
                    path.display(),
                    r.freq_hz,
                    r.kabs_per_m
                )));
            }
            rows.push((r.freq_hz, r.kabs_per_m));
        }
        Self::table(rows)
    }

    pub fn table(mut rows: Vec<(f64, f64)>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::input("absorption table is empty"));
        }
        rows.sort_by(|a, b| a.0.total_cmp(&b.0));
        Ok(Absorption::Table(rows))
    }

    pub fn kabs(&self, f: f64) -> Result<f64> {
        match self {
            Absorption::Constant(k) => Ok(*k),
            Absorption::Table(rows) => {
                let (lo, hi) = (rows[0].0, rows[rows.len() - 1].0);
                if f < lo || f > hi {
                    return Err(Error::input(format!(
                        "frequency {f:.6e} Hz outside absorption table support [{lo:.6e}, {hi:.6e}] Hz"
                    )));
                }
                let i = rows.partition_point(|r| r.0 <= f);
                if i == 0 {
                    return Ok(rows[0].1);
                }
                if i == rows.len() {
                    return Ok(rows[rows.len() - 1].1);
                }
                let (f0, k0) = rows[i - 1];
                let (f1, k1) = rows[i];
                Ok(k0 + (k1 - k0) * (f - f0) / (f1 - f0))
            }
        }
    }
}

/// Absorption loss `exp(-k_abs(f) d)`.
pub fn molecular_absorption_loss(f_k: f64, d: f64, kabs: &Absorption) -> Result<f64> {
    let k = kabs.kabs(f_k)?;
    if k < 0.0 {
        return Err(Error::input(format!("negative absorption coefficient {k} at {f_k} Hz")));
    }
    Ok((-k * d).exp())
}

/// Reflecting-surface parameters.
#[derive(Debug, Clone, PartialEq, Deserialize, serde::Serialize)]
pub struct MaterialProps {
    pub name: String,
    pub sigma_r_mm: f64,
    pub kappa_per_cm: f64,
    pub eta: f64,
}

impl MaterialProps {
    pub fn new(name: &str, sigma_r_mm: f64, kappa_per_cm: f64, eta: f64) -> Result<Self> {
        let m = MaterialProps { name: name.to_string(), sigma_r_mm, kappa_per_cm, eta };
        m.check()?;
        Ok(m)
    }

    fn check(&self) -> Result<()> {
        if !(self.sigma_r_mm >= 0.0 && self.eta >= 1.0 && self.kappa_per_cm >= 0.0) {
            return Err(Error::input(format!(
                "material {:?} violates sigma_r >= 0, eta >= 1, kappa >= 0",
                self.name
            )));
        }
        Ok(())
    }
}

/// The indoor office materials used by default.
pub fn default_materials() -> Vec<MaterialProps> {
    [
        ("Polycarbonate (PC)", 0.0, 23.0, 1.52),
        ("Polystyrene (PS)", 0.002, 2.0, 1.6),
        ("Polyvinyl chloride (PVC)", 0.028, 19.0, 1.68),
        ("Plaster s1", 0.05, 10.0, 2.0),
        ("Gypsum plaster", 0.13, 38.0, 1.4),
        ("Plaster s2", 0.15, 10.0, 2.0),
    ]
    .into_iter()
    .map(|(n, s, k, e)| MaterialProps { name: n.to_string(), sigma_r_mm: s, kappa_per_cm: k, eta: e })
    .collect()
}

/// Reads a `name,sigma_r_mm,kappa_per_cm,eta` CSV with header.
pub fn load_materials(path: &Path) -> Result<Vec<MaterialProps>> {
    let mut rdr = csv::Reader::from_path(path)?;
    let mut out = Vec::new();
    for rec in rdr.deserialize() {
        let m: MaterialProps = rec?;
        m.check()?;
        out.push(m);
    }
    if out.is_empty() {
        return Err(Error::input(format!("materials table {} is empty", path.display())));
    }
    Ok(out)
}

/// Characteristic impedance of the reflecting medium at frequency `f`.
pub fn characteristic_impedance(f: f64, mat: &MaterialProps) -> Complex64 {
    let kappa = mat.kappa_per_cm * 100.0;
    let x = kappa * SPEED_OF_LIGHT / (4.0 * PI * f);
    let eps_r = Complex64::new(mat.eta * mat.eta - x, -2.0 * mat.eta * x);
    (Complex64::new(MU_0, 0.0) / (eps_r * EPSILON_0)).sqrt()
}

/// Rayleigh roughness factor `exp(-½(4π f σ_r cos ν_i / c)²)`.
pub fn rayleigh_factor(f: f64, sigma_r_mm: f64, nu_i: f64) -> f64 {
    let g = 4.0 * PI * f * sigma_r_mm * 1e-3 * nu_i.cos() / SPEED_OF_LIGHT;
    (-0.5 * g * g).exp()
}

/// Rough-surface reflection coefficient: Fresnel quotient times the Rayleigh factor.
pub fn reflection_coefficient(f_k: f64, mat: &MaterialProps, nu_i: f64) -> Result<Complex64> {
    if !(0.0..PI / 2.0).contains(&nu_i) {
        return Err(Error::input(format!("incidence angle {nu_i} rad outside [0, π/2)")));
    }
    let z = characteristic_impedance(f_k, mat);
    let z0 = free_space_impedance();
    let nu_r = (z * (nu_i.sin() / z0)).asin();
    let zc = z * nu_i.cos();
    let z0c = nu_r.cos() * z0;
    let fresnel = (zc - z0c) / (zc + z0c);
    let out = fresnel * rayleigh_factor(f_k, mat.sigma_r_mm, nu_i);
    if out.norm() > 1.0 {
        log::warn!("|reflection coefficient| = {:.4} > 1 for {} at {f_k:.4e} Hz", out.norm(), mat.name);
    }
    Ok(out)
}
