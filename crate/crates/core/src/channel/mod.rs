//! Multi-user dual-wideband THz channel synthesis.

pub mod gmm;
pub mod propagation;
pub mod pulse;
pub mod steering;

use std::f64::consts::PI;

use rand::Rng;
use rustfft::FftPlanner;

use crate::config::ScenarioConfig;
use crate::error::{Error, Result};
use crate::linalg::{CMat, C64};

pub use gmm::{draw_angles, draw_gmm_angles, GmmAngles, UserAngleModel};
pub use propagation::{
    free_space_loss, molecular_absorption_loss, reflection_coefficient, Absorption, MaterialProps,
};
pub use pulse::pulse_shaping_coefficient;
pub use steering::{effective_aoa, steering_vector, subcarrier_frequencies, subcarrier_frequency};

/// Range of NLoS path lengths relative to the direct distance.
pub const NLOS_EXCESS_RANGE: (f64, f64) = (1.1, 1.6);
/// Range of incidence angles on reflecting surfaces, degrees.
pub const INCIDENCE_RANGE_DEG: (f64, f64) = (20.0, 70.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PathKind {
    LoS,
    NLoS,
}

/// One propagation path of one user.
#[derive(Debug, Clone, PartialEq)]
pub struct PathComponent {
    pub kind: PathKind,
    pub cluster: usize,
    pub ray: usize,
    pub aoa_deg: f64,
    pub aod_deg: f64,
    pub delay_s: f64,
    pub distance_m: f64,
    pub material: Option<MaterialProps>,
    pub incidence_deg: Option<f64>,
    pub phase_rad: f64,
}

/// Propagation environment shared by all paths.
#[derive(Debug, Clone)]
pub struct Environment {
    pub absorption: Absorption,
    pub materials: Vec<MaterialProps>,
}

impl Environment {
    pub fn from_config(cfg: &ScenarioConfig) -> Result<Self> {
        let absorption = match &cfg.kabs_table {
            Some(p) => Absorption::from_csv(p)?,
            None => Absorption::Constant(cfg.kabs_per_m),
        };
        let materials = match &cfg.materials_csv {
            Some(p) => propagation::load_materials(p)?,
            None => propagation::default_materials(),
        };
        Ok(Environment { absorption, materials })
    }
}

/// Per-subcarrier CFR and its tap-domain counterpart.
#[derive(Debug, Clone)]
pub struct MultiUserChannel {
    /// `K` matrices of shape `N_R × U·N_Tu`.
    pub cfr: Vec<CMat>,
    /// K-point inverse transform of `cfr` along the subcarrier axis.
    pub taps: Vec<CMat>,
    pub paths: Vec<Vec<PathComponent>>,
}

impl MultiUserChannel {
    pub fn subcarriers(&self) -> usize {
        self.cfr.len()
    }

    /// Columns of `cfr[k]` belonging to user `u`.
    pub fn user_block(&self, k: usize, u: usize, n_tu: usize) -> CMat {
        self.cfr[k].columns(u * n_tu, n_tu).into_owned()
    }

    /// Total energy `Σ_k ‖H[k]‖_F²`.
    pub fn energy(&self) -> f64 {
        self.cfr.iter().map(|h| h.norm_squared()).sum()
    }
}

fn uniform_phase<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    // (−π, π]
    PI - rng.random::<f64>() * 2.0 * PI
}

/// Draws path metadata for every user: one LoS path followed by
/// `N_NLoS × N_ray` diffuse rays.
pub fn draw_paths<R: Rng + ?Sized>(
    cfg: &ScenarioConfig,
    env: &Environment,
    rng: &mut R,
) -> Result<Vec<Vec<PathComponent>>> {
    let angles = draw_angles(cfg, rng)?;
    let ts = cfg.sampling_period();
    let max_delay = (cfg.delay_taps - 1) as f64 * ts;
    let mut out = Vec::with_capacity(cfg.num_users);
    for user_angles in angles {
        let mut it = user_angles.into_iter();
        let (aoa, aod) = it.next().expect("LoS angle");
        let mut paths = vec![PathComponent {
            kind: PathKind::LoS,
            cluster: 0,
            ray: 0,
            aoa_deg: aoa,
            aod_deg: aod,
            delay_s: 0.0,
            distance_m: cfg.distance_m,
            material: None,
            incidence_deg: None,
            phase_rad: uniform_phase(rng),
        }];
        for z in 1..=cfg.nlos_clusters {
            let delay = if max_delay > 0.0 { rng.random_range(0.0..=max_delay) } else { 0.0 };
            let dist = cfg.distance_m * rng.random_range(NLOS_EXCESS_RANGE.0..NLOS_EXCESS_RANGE.1);
            let material = env.materials[rng.random_range(0..env.materials.len())].clone();
            let incidence = rng.random_range(INCIDENCE_RANGE_DEG.0..=INCIDENCE_RANGE_DEG.1);
            for j in 1..=cfg.diffuse_rays {
                let (aoa, aod) = it.next().expect("ray angle");
                paths.push(PathComponent {
                    kind: PathKind::NLoS,
                    cluster: z,
                    ray: j,
                    aoa_deg: aoa,
                    aod_deg: aod,
                    delay_s: delay,
                    distance_m: dist,
                    material: Some(material.clone()),
                    incidence_deg: Some(incidence),
                    phase_rad: uniform_phase(rng),
                });
            }
        }
        out.push(paths);
    }
    Ok(out)
}

/// Complex path gain `α(f, d)` including the reflection loss of NLoS paths.
pub fn path_gain(path: &PathComponent, f: f64, env: &Environment) -> Result<C64> {
    let mut power = free_space_loss(f, path.distance_m)? * molecular_absorption_loss(f, path.distance_m, &env.absorption)?;
    if path.kind == PathKind::NLoS {
        let (mat, inc) = match (&path.material, path.incidence_deg) {
            (Some(m), Some(i)) => (m, i),
            _ => return Err(Error::input("NLoS path without material or incidence angle")),
        };
        power *= reflection_coefficient(f, mat, inc.to_radians())?.norm_sqr();
    }
    Ok(C64::from_polar(power.sqrt(), path.phase_rad))
}

/// Assembles `H_MU[k]` for every subcarrier from per-user path lists.
pub fn build_mu_cfr(
    cfg: &ScenarioConfig,
    env: &Environment,
    paths: &[Vec<PathComponent>],
) -> Result<MultiUserChannel> {
    if paths.len() != cfg.num_users {
        return Err(Error::input(format!("{} path lists for {} users", paths.len(), cfg.num_users)));
    }
    let (nr, ntu, kk) = (cfg.rx_antennas, cfg.tx_antennas_per_user, cfg.subcarriers);
    let ts = cfg.sampling_period();
    let freqs = subcarrier_frequencies(cfg);
    let gain = cfg.tx_gain_per_user() * cfg.rx_gain;
    let los_scale = ((ntu * nr) as f64).sqrt() * gain;
    let rays = (cfg.nlos_clusters * cfg.diffuse_rays).max(1) as f64;
    let nlos_scale = los_scale / rays.sqrt();

    let mut cfr = vec![CMat::zeros(nr, ntu * cfg.num_users); kk];
    for (u, list) in paths.iter().enumerate() {
        if list.is_empty() {
            return Err(Error::input(format!("user {u} has no paths")));
        }
        for p in list {
            if !(p.delay_s >= 0.0 && p.delay_s < cfg.delay_taps as f64 * ts) {
                return Err(Error::input(format!("path delay {} s outside [0, L·T_s)", p.delay_s)));
            }
            let betas = pulse::pulse_shaping_coefficients(p.delay_s, cfg.psf, ts, cfg.rrc_rolloff, kk);
            let scale = if p.kind == PathKind::LoS { los_scale } else { nlos_scale };
            let (cphi, ctheta) = (p.aoa_deg.to_radians().cos(), p.aod_deg.to_radians().cos());
            for (k, h) in cfr.iter_mut().enumerate() {
                let rho = freqs[k] / cfg.carrier_hz;
                let coef = path_gain(p, freqs[k], env)? * betas[k] * scale;
                let ar = steering::steering_from_cosine(cphi, rho, nr);
                let at = steering::steering_from_cosine(ctheta, rho, ntu);
                let mut block = h.columns_mut(u * ntu, ntu);
                for c in 0..ntu {
                    let w = coef * at[c].conj();
                    for r in 0..nr {
                        block[(r, c)] += ar[r] * w;
                    }
                }
            }
        }
    }
    let taps = cfr_to_taps(&cfr);
    Ok(MultiUserChannel { cfr, taps, paths: paths.to_vec() })
}

/// Draws paths and assembles the channel.
pub fn generate_channel<R: Rng + ?Sized>(
    cfg: &ScenarioConfig,
    env: &Environment,
    rng: &mut R,
) -> Result<MultiUserChannel> {
    let paths = draw_paths(cfg, env, rng)?;
    build_mu_cfr(cfg, env, &paths)
}

fn transform_entries(src: &[CMat], inverse: bool) -> Vec<CMat> {
    let kk = src.len();
    if kk == 0 {
        return Vec::new();
    }
    let (rows, cols) = src[0].shape();
    let mut planner = FftPlanner::<f64>::new();
    let fft = if inverse { planner.plan_fft_inverse(kk) } else { planner.plan_fft_forward(kk) };
    let scale = if inverse { 1.0 / kk as f64 } else { 1.0 };
    let mut out = vec![CMat::zeros(rows, cols); kk];
    let mut buf = vec![C64::new(0.0, 0.0); kk];
    for c in 0..cols {
        for r in 0..rows {
            for (k, m) in src.iter().enumerate() {
                buf[k] = m[(r, c)];
            }
            fft.process(&mut buf);
            for (k, m) in out.iter_mut().enumerate() {
                m[(r, c)] = buf[k] * scale;
            }
        }
    }
    out
}

/// Tap-domain channel `(1/K) Σ_k H[k] e^{j2πkn/K}`.
pub fn cfr_to_taps(cfr: &[CMat]) -> Vec<CMat> {
    transform_entries(cfr, true)
}

/// Forward K-point transform of the taps.
pub fn taps_to_cfr(taps: &[CMat]) -> Vec<CMat> {
    transform_entries(taps, false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::frob2;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn los_only(cfg: &ScenarioConfig, aoa: f64, aod: f64) -> Vec<Vec<PathComponent>> {
        (0..cfg.num_users)
            .map(|_| {
                vec![PathComponent {
                    kind: PathKind::LoS,
                    cluster: 0,
                    ray: 0,
                    aoa_deg: aoa,
                    aod_deg: aod,
                    delay_s: 0.0,
                    distance_m: cfg.distance_m,
                    material: None,
                    incidence_deg: None,
                    phase_rad: 0.3,
                }]
            })
            .collect()
    }

    #[test]
    fn broadside_los_is_flat_and_rank_one() {
        let cfg = ScenarioConfig { psf: crate::config::PulseShape::Rect, ..ScenarioConfig::desk() };
        let env = Environment::from_config(&cfg).unwrap();
        let ch = build_mu_cfr(&cfg, &env, &los_only(&cfg, 90.0, 90.0)).unwrap();
        let (nr, ntu) = (cfg.rx_antennas, cfg.tx_antennas_per_user);
        let freqs = subcarrier_frequencies(&cfg);
        for (k, h) in ch.cfr.iter().enumerate() {
            let alpha = path_gain(&ch.paths[0][0], freqs[k], &env).unwrap();
            let expect = alpha * cfg.tx_gain_per_user() * cfg.rx_gain;
            let hu = ch.user_block(k, 0, ntu);
            for z in hu.iter() {
                assert!((z - expect).norm() < 1e-9 * expect.norm());
            }
            let want_norm = ((nr * ntu) as f64).sqrt() * alpha.norm() * cfg.tx_gain_per_user() * cfg.rx_gain;
            assert!((hu.norm() - want_norm).abs() < 1e-9 * want_norm);
            let sv = hu.singular_values();
            assert!(sv[1] < 1e-9 * sv[0]);
            assert_eq!(h.shape(), (nr, ntu * cfg.num_users));
        }
    }

    #[test]
    fn single_path_norm_matches_scalar_product() {
        let cfg = ScenarioConfig::desk();
        let env = Environment::from_config(&cfg).unwrap();
        let paths = los_only(&cfg, 37.0, -112.0);
        let ch = build_mu_cfr(&cfg, &env, &paths).unwrap();
        let freqs = subcarrier_frequencies(&cfg);
        let ts = cfg.sampling_period();
        for k in 0..cfg.subcarriers {
            let hu = ch.user_block(k, 1, cfg.tx_antennas_per_user);
            let alpha = path_gain(&paths[1][0], freqs[k], &env).unwrap();
            let beta = pulse_shaping_coefficient(k, 0.0, cfg.psf, ts, cfg.rrc_rolloff, cfg.subcarriers);
            let want = ((cfg.rx_antennas * cfg.tx_antennas_per_user) as f64).sqrt()
                * (alpha * beta).norm()
                * cfg.tx_gain_per_user()
                * cfg.rx_gain;
            assert!((hu.norm() - want).abs() < 1e-9 * want);
        }
    }

    #[test]
    fn taps_round_trip_and_rank_bounds() {
        let cfg = ScenarioConfig::desk();
        let env = Environment::from_config(&cfg).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let ch = generate_channel(&cfg, &env, &mut rng).unwrap();
        let back = taps_to_cfr(&ch.taps);
        let err: f64 = back.iter().zip(&ch.cfr).map(|(a, b)| frob2(&(a - b))).sum();
        assert!((err / ch.energy()).sqrt() < 1e-10);
        for p in ch.paths.iter().flatten() {
            assert!(p.delay_s >= 0.0 && p.delay_s < cfg.delay_taps as f64 * cfg.sampling_period());
            assert!(p.phase_rad > -PI && p.phase_rad <= PI);
            if p.kind == PathKind::NLoS {
                assert!(p.material.is_some() && p.incidence_deg.is_some());
            }
        }
    }

    #[test]
    fn user_blocks_reproducible_from_their_paths() {
        let cfg = ScenarioConfig::desk();
        let env = Environment::from_config(&cfg).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let ch = generate_channel(&cfg, &env, &mut rng).unwrap();
        let single = ScenarioConfig { num_users: 1, tx_gain: cfg.tx_gain_per_user(), ..cfg.clone() };
        for u in 0..cfg.num_users {
            let alone = build_mu_cfr(&single, &env, &ch.paths[u..u + 1]).unwrap();
            for k in 0..cfg.subcarriers {
                let diff = &alone.cfr[k] - ch.user_block(k, u, cfg.tx_antennas_per_user);
                assert!(diff.norm() <= 1e-12 * alone.cfr[k].norm());
            }
        }
    }

    #[test]
    fn nlos_rank_bounded_by_ray_count() {
        let cfg = ScenarioConfig {
            rx_antennas: 16,
            tx_antennas_per_user: 8,
            grid_tx: 8,
            tx_rf_chains: 1,
            nlos_clusters: 1,
            diffuse_rays: 2,
            ..ScenarioConfig::desk()
        };
        let env = Environment::from_config(&cfg).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let mut paths = draw_paths(&cfg, &env, &mut rng).unwrap();
        for p in &mut paths {
            p.retain(|x| x.kind == PathKind::NLoS);
        }
        let ch = build_mu_cfr(&cfg, &env, &paths).unwrap();
        let hu = ch.user_block(3, 0, 8);
        let sv = hu.singular_values();
        let mut s: Vec<f64> = sv.iter().cloned().collect();
        s.sort_by(|a, b| b.total_cmp(a));
        assert!(s[2] < 1e-9 * s[0]);
    }

    #[test]
    fn mismatched_path_lists_rejected() {
        let cfg = ScenarioConfig::desk();
        let env = Environment::from_config(&cfg).unwrap();
        let one = ScenarioConfig { num_users: 1, ..cfg.clone() };
        assert!(build_mu_cfr(&cfg, &env, &los_only(&one, 10.0, 10.0)).is_err());
    }
}
