//! Angle generation: per-user two-component Gaussian mixtures with separated means.

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::config::{AngleMode, ScenarioConfig};
use crate::error::{Error, Result};

/// Attempts allowed when rejection-sampling separated user means.
pub const SEPARATION_RETRIES: usize = 1000;

/// Per-user AoA/AoD mixture. Angles in degrees.
#[derive(Debug, Clone, PartialEq)]
pub struct UserAngleModel {
    pub aoa_means_deg: [f64; 2],
    pub aod_means_deg: [f64; 2],
    pub weights: [f64; 2],
    pub spread_deg: f64,
}

impl UserAngleModel {
    /// Draws one (AoA, AoD) pair: pick a component, then add Gaussian spread.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> (f64, f64) {
        let c = if rng.random::<f64>() < self.weights[0] { 0 } else { 1 };
        if self.spread_deg == 0.0 {
            return (self.aoa_means_deg[c], self.aod_means_deg[c]);
        }
        let n = Normal::new(0.0, self.spread_deg).expect("finite spread");
        (
            wrap_deg(self.aoa_means_deg[c] + n.sample(rng)),
            wrap_deg(self.aod_means_deg[c] + n.sample(rng)),
        )
    }
}

/// Wraps an angle into [-180, 180).
pub fn wrap_deg(a: f64) -> f64 {
    (a + 180.0).rem_euclid(360.0) - 180.0
}

/// Absolute angular distance on the circle, in [0, 180].
pub fn circular_distance_deg(a: f64, b: f64) -> f64 {
    wrap_deg(a - b).abs()
}

/// Offset of the second mixture component from the user mean: ±[10°, 15°].
fn secondary_offset<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    let mag = rng.random_range(10.0..15.0);
    if rng.random::<bool>() {
        mag
    } else {
        -mag
    }
}

fn uniform_deg<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.random_range(-180.0..180.0)
}

/// Draws one mixture per user, rejection-sampling the AoA means until every
/// pair is at least `min_separation_deg` apart.
pub fn draw_user_models<R: Rng + ?Sized>(cfg: &ScenarioConfig, rng: &mut R) -> Result<Vec<UserAngleModel>> {
    let u = cfg.num_users;
    if u == 0 {
        return Err(Error::config(&["num_users"], "at least one user is required"));
    }
    let mut means = Vec::with_capacity(u);
    'outer: for _ in 0..SEPARATION_RETRIES {
        means.clear();
        for _ in 0..u {
            means.push(uniform_deg(rng));
        }
        for i in 0..u {
            for j in i + 1..u {
                if circular_distance_deg(means[i], means[j]) < cfg.min_separation_deg {
                    continue 'outer;
                }
            }
        }
        return Ok(means
            .iter()
            .map(|&m| {
                let aod = uniform_deg(rng);
                let a1: f64 = rng.random();
                UserAngleModel {
                    aoa_means_deg: [m, wrap_deg(m + secondary_offset(rng))],
                    aod_means_deg: [aod, wrap_deg(aod + secondary_offset(rng))],
                    weights: [a1, 1.0 - a1],
                    spread_deg: cfg.angle_spread_deg,
                }
            })
            .collect());
    }
    Err(Error::config(
        &["num_users", "min_separation_deg"],
        format!(
            "could not place {u} user means {}° apart within {SEPARATION_RETRIES} attempts",
            cfg.min_separation_deg
        ),
    ))
}

/// Mixture models plus the drawn per-user (AoA, AoD) lists in degrees.
#[derive(Debug, Clone)]
pub struct GmmAngles {
    pub models: Vec<UserAngleModel>,
    /// `1 + N_NLoS·N_ray` pairs per user: LoS first, then rays cluster by cluster.
    pub angles: Vec<Vec<(f64, f64)>>,
}

pub fn draw_gmm_angles<R: Rng + ?Sized>(cfg: &ScenarioConfig, rng: &mut R) -> Result<GmmAngles> {
    let models = draw_user_models(cfg, rng)?;
    let count = 1 + cfg.nlos_clusters * cfg.diffuse_rays;
    let angles = models.iter().map(|m| (0..count).map(|_| m.sample(rng)).collect()).collect();
    Ok(GmmAngles { models, angles })
}

/// Angle pair whose directional cosines sit within half a grid cell of a
/// random grid point on each side.
pub fn draw_off_grid_pair<R: Rng + ?Sized>(g_r: usize, g_t: usize, rng: &mut R) -> (f64, f64) {
    (off_grid_angle(g_r, rng), off_grid_angle(g_t, rng))
}

fn off_grid_angle<R: Rng + ?Sized>(g: usize, rng: &mut R) -> f64 {
    let r = rng.random_range(0..g);
    let half = 1.0 / g as f64;
    let c = (2.0 / g as f64) * r as f64 - 1.0 + rng.random_range(-half..half);
    c.clamp(-1.0, 1.0).acos().to_degrees()
}

/// Per-user angle lists following the configured angle mode. In off-grid mode
/// every ray of a cluster shares the cluster's angle pair.
pub fn draw_angles<R: Rng + ?Sized>(cfg: &ScenarioConfig, rng: &mut R) -> Result<Vec<Vec<(f64, f64)>>> {
    match cfg.angle_mode {
        AngleMode::Gmm => Ok(draw_gmm_angles(cfg, rng)?.angles),
        AngleMode::OffGrid => Ok((0..cfg.num_users)
            .map(|_| {
                let mut v = vec![draw_off_grid_pair(cfg.grid_rx, cfg.grid_tx, rng)];
                for _ in 0..cfg.nlos_clusters {
                    let p = draw_off_grid_pair(cfg.grid_rx, cfg.grid_tx, rng);
                    v.extend(std::iter::repeat_n(p, cfg.diffuse_rays));
                }
                v
            })
            .collect()),
    }
}
