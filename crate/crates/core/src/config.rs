//! Scenario parameters shared by every stage of the pipeline.

use std::fmt;
use std::path::PathBuf;

use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};

/// ADC resolution of every receive RF chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AdcBits {
    Finite(u32),
    Infinite,
}

impl fmt::Display for AdcBits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AdcBits::Finite(b) => write!(f, "{b}"),
            AdcBits::Infinite => f.write_str("inf"),
        }
    }
}

impl std::str::FromStr for AdcBits {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        if t.eq_ignore_ascii_case("inf") || t == "∞" {
            return Ok(AdcBits::Infinite);
        }
        t.parse::<u32>()
            .map(AdcBits::Finite)
            .map_err(|_| Error::config(&["adc_bits"], format!("expected an integer or \"inf\", got {s:?}")))
    }
}

impl Serialize for AdcBits {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            AdcBits::Finite(b) => s.serialize_u32(*b),
            AdcBits::Infinite => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for AdcBits {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct BitsVisitor;
        impl Visitor<'_> for BitsVisitor {
            type Value = AdcBits;
            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a bit count or \"inf\"")
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<AdcBits, E> {
                u32::try_from(v).map(AdcBits::Finite).map_err(E::custom)
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<AdcBits, E> {
                u32::try_from(v).map(AdcBits::Finite).map_err(E::custom)
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<AdcBits, E> {
                if v.is_infinite() && v > 0.0 {
                    Ok(AdcBits::Infinite)
                } else if v.fract() == 0.0 && v >= 0.0 {
                    Ok(AdcBits::Finite(v as u32))
                } else {
                    Err(E::custom(format!("invalid bit count {v}")))
                }
            }
            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<AdcBits, E> {
                v.parse().map_err(|e: Error| E::custom(e.to_string()))
            }
        }
        d.deserialize_any(BitsVisitor)
    }
}

/// Pulse-shaping filter applied to every multipath component.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PulseShape {
    Rrc,
    Rect,
}

/// How path angles are generated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AngleMode {
    /// Two-component Gaussian mixture around separated user means.
    Gmm,
    /// Grid angles perturbed by a uniform offset of at most half a grid cell
    /// (in directional-cosine units).
    OffGrid,
}

/// Which noise covariance the estimators see.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseCovarianceMode {
    Known,
    Sampled,
}

/// All system, channel, pilot and algorithm parameters of one scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub num_users: usize,
    pub tx_antennas_per_user: usize,
    pub rx_antennas: usize,
    /// RF chains per user.
    pub tx_rf_chains: usize,
    pub rx_rf_chains: usize,
    pub subcarriers: usize,
    pub pilot_blocks: usize,
    pub pilots_per_block: usize,
    pub delay_taps: usize,
    pub nlos_clusters: usize,
    pub diffuse_rays: usize,
    pub carrier_hz: f64,
    pub bandwidth_hz: f64,
    pub distance_m: f64,
    /// Combined linear transmit antenna gain of all users.
    pub tx_gain: f64,
    /// Linear receive antenna gain.
    pub rx_gain: f64,
    pub grid_rx: usize,
    /// Transmit angular grid size per user.
    pub grid_tx: usize,
    pub adc_bits: AdcBits,
    pub phase_bits: u32,
    pub psf: PulseShape,
    pub rrc_rolloff: f64,
    pub pilot_power: f64,
    pub noise_var: f64,
    pub angle_spread_deg: f64,
    pub min_separation_deg: f64,
    pub rng_seed: u64,

    pub angle_mode: AngleMode,
    /// Constant molecular absorption coefficient (m⁻¹), used unless
    /// `kabs_table` is set.
    pub kabs_per_m: f64,
    pub kabs_table: Option<PathBuf>,
    pub materials_csv: Option<PathBuf>,
    pub noise_covariance: NoiseCovarianceMode,
    pub noise_cov_samples: usize,
    pub data_vectors: usize,
    pub constellation: usize,
    /// BGSR stopping threshold on `‖ΔΓ‖_F²`; `None` rescales the reference
    /// value to the scenario's hyperparameter count.
    pub bgsr_eps: Option<f64>,
    pub bgsr_kmax: usize,
    /// GSMP stopping threshold; `None` rescales the reference value to the
    /// scenario's measurement dimensions.
    pub gsmp_eps0: Option<f64>,
}

/// Reference GSMP threshold and the measurement count `M·N_RF·K` it was tuned for.
pub const GSMP_REFERENCE_EPS0: f64 = 2.0;
pub const GSMP_REFERENCE_DIMS: f64 = (20 * 8 * 64) as f64;

/// Reference BGSR threshold and the hyperparameter count `U·G_R·G_T` it was tuned for.
pub const BGSR_REFERENCE_EPS: f64 = 1.0;
pub const BGSR_REFERENCE_DIMS: f64 = (3 * 96 * 8) as f64;

fn dbi_to_linear(dbi: f64) -> f64 {
    10f64.powf(dbi / 10.0)
}

impl ScenarioConfig {
    /// Full-scale simulation parameters (48 receive antennas, 64 subcarriers,
    /// 20 pilot blocks, 3 users).
    pub fn paper() -> Self {
        ScenarioConfig {
            num_users: 3,
            tx_antennas_per_user: 4,
            rx_antennas: 48,
            tx_rf_chains: 2,
            rx_rf_chains: 8,
            subcarriers: 64,
            pilot_blocks: 20,
            pilots_per_block: 62,
            delay_taps: 3,
            nlos_clusters: 3,
            diffuse_rays: 3,
            carrier_hz: 0.65e12,
            bandwidth_hz: 5e9,
            distance_m: 15.0,
            tx_gain: dbi_to_linear(31.0),
            rx_gain: dbi_to_linear(31.0),
            grid_rx: 96,
            grid_tx: 8,
            adc_bits: AdcBits::Finite(3),
            phase_bits: 4,
            psf: PulseShape::Rrc,
            rrc_rolloff: 0.8,
            pilot_power: 1.0,
            noise_var: 0.1,
            angle_spread_deg: 2.0,
            min_separation_deg: 5.0,
            rng_seed: 1,
            angle_mode: AngleMode::Gmm,
            kabs_per_m: 0.05,
            kabs_table: None,
            materials_csv: None,
            noise_covariance: NoiseCovarianceMode::Known,
            noise_cov_samples: 200,
            data_vectors: 100,
            constellation: 8,
            bgsr_eps: None,
            bgsr_kmax: 20,
            gsmp_eps0: None,
        }
    }

    /// Desk-scale preset: 16 receive antennas, 16 subcarriers, 8 pilot blocks,
    /// 2 users, 32-point receive grid.
    pub fn desk() -> Self {
        ScenarioConfig {
            num_users: 2,
            tx_antennas_per_user: 2,
            rx_antennas: 16,
            tx_rf_chains: 1,
            rx_rf_chains: 4,
            subcarriers: 16,
            pilot_blocks: 8,
            pilots_per_block: 14,
            grid_rx: 32,
            grid_tx: 4,
            ..Self::paper()
        }
    }

    pub fn preset(name: &str) -> Result<Self> {
        match name {
            "desk" => Ok(Self::desk()),
            "paper" => Ok(Self::paper()),
            other => Err(Error::config(&["preset"], format!("unknown preset {other:?} (expected desk or paper)"))),
        }
    }

    /// Total transmit antennas `U·N_Tu`.
    pub fn total_tx_antennas(&self) -> usize {
        self.num_users * self.tx_antennas_per_user
    }

    /// Rows of the stacked measurement model, `M·N_RF_R`.
    pub fn measurement_rows(&self) -> usize {
        self.pilot_blocks * self.rx_rf_chains
    }

    /// Sampling period, taken as the Nyquist period of the bandwidth.
    pub fn sampling_period(&self) -> f64 {
        1.0 / self.bandwidth_hz
    }

    /// Per-user transmit gain; the configured gain is shared by all users.
    pub fn tx_gain_per_user(&self) -> f64 {
        self.tx_gain / self.num_users as f64
    }

    pub fn gsmp_threshold(&self) -> f64 {
        self.gsmp_eps0.unwrap_or_else(|| {
            let dims = (self.pilot_blocks * self.rx_rf_chains * self.subcarriers) as f64;
            GSMP_REFERENCE_EPS0 * dims / GSMP_REFERENCE_DIMS
        })
    }

    pub fn bgsr_threshold(&self) -> f64 {
        self.bgsr_eps.unwrap_or_else(|| {
            let dims = (self.num_users * self.grid_rx * self.grid_tx) as f64;
            BGSR_REFERENCE_EPS * dims / BGSR_REFERENCE_DIMS
        })
    }

    pub fn snr_db(&self) -> f64 {
        10.0 * (1.0 / self.noise_var).log10()
    }

    pub fn with_snr_db(mut self, snr_db: f64) -> Self {
        self.noise_var = 10f64.powf(-snr_db / 10.0);
        self
    }

    /// Checks every structural invariant, naming the offending keys.
    pub fn validate(&self) -> Result<()> {
        let counts: [(&str, usize); 14] = [
            ("num_users", self.num_users),
            ("tx_antennas_per_user", self.tx_antennas_per_user),
            ("rx_antennas", self.rx_antennas),
            ("tx_rf_chains", self.tx_rf_chains),
            ("rx_rf_chains", self.rx_rf_chains),
            ("subcarriers", self.subcarriers),
            ("pilot_blocks", self.pilot_blocks),
            ("pilots_per_block", self.pilots_per_block),
            ("delay_taps", self.delay_taps),
            ("grid_rx", self.grid_rx),
            ("grid_tx", self.grid_tx),
            ("data_vectors", self.data_vectors),
            ("bgsr_kmax", self.bgsr_kmax),
            ("noise_cov_samples", self.noise_cov_samples),
        ];
        for (key, v) in counts {
            if v == 0 {
                return Err(Error::config(&[key], "must be at least 1"));
            }
        }
        if self.rx_rf_chains > self.rx_antennas {
            return Err(Error::config(
                &["rx_rf_chains", "rx_antennas"],
                format!("hybrid constraint violated: {} RF chains > {} antennas", self.rx_rf_chains, self.rx_antennas),
            ));
        }
        if self.tx_rf_chains > self.tx_antennas_per_user {
            return Err(Error::config(
                &["tx_rf_chains", "tx_antennas_per_user"],
                format!(
                    "hybrid constraint violated: {} RF chains > {} antennas",
                    self.tx_rf_chains, self.tx_antennas_per_user
                ),
            ));
        }
        if self.subcarriers != self.pilots_per_block + self.delay_taps - 1 {
            return Err(Error::config(
                &["subcarriers", "pilots_per_block", "delay_taps"],
                format!(
                    "zero-padded frame requires subcarriers = pilots_per_block + delay_taps - 1 ({} != {} + {} - 1)",
                    self.subcarriers, self.pilots_per_block, self.delay_taps
                ),
            ));
        }
        if self.grid_rx < self.rx_antennas {
            return Err(Error::config(&["grid_rx", "rx_antennas"], "receive grid must be at least the antenna count"));
        }
        if self.grid_tx < self.tx_antennas_per_user {
            return Err(Error::config(
                &["grid_tx", "tx_antennas_per_user"],
                "transmit grid must be at least the antenna count",
            ));
        }
        if let AdcBits::Finite(0) = self.adc_bits {
            return Err(Error::config(&["adc_bits"], "ADC resolution must be at least 1 bit"));
        }
        if self.phase_bits == 0 {
            return Err(Error::config(&["phase_bits"], "phase quantization needs at least 1 bit"));
        }
        let positive: [(&str, f64); 5] = [
            ("carrier_hz", self.carrier_hz),
            ("bandwidth_hz", self.bandwidth_hz),
            ("distance_m", self.distance_m),
            ("pilot_power", self.pilot_power),
            ("noise_var", self.noise_var),
        ];
        for (key, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::config(&[key], format!("must be positive and finite, got {v}")));
            }
        }
        let nonneg: [(&str, f64); 5] = [
            ("tx_gain", self.tx_gain),
            ("rx_gain", self.rx_gain),
            ("angle_spread_deg", self.angle_spread_deg),
            ("min_separation_deg", self.min_separation_deg),
            ("kabs_per_m", self.kabs_per_m),
        ];
        for (key, v) in nonneg {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::config(&[key], format!("must be non-negative and finite, got {v}")));
            }
        }
        if !(0.0..=1.0).contains(&self.rrc_rolloff) {
            return Err(Error::config(&["rrc_rolloff"], "roll-off must lie in [0, 1]"));
        }
        if self.constellation < 2 || !self.constellation.is_power_of_two() {
            return Err(Error::config(&["constellation"], "PSK order must be a power of two >= 2"));
        }
        for (key, v) in [("gsmp_eps0", self.gsmp_eps0), ("bgsr_eps", self.bgsr_eps)] {
            if let Some(e) = v {
                if !(e.is_finite() && e > 0.0) {
                    return Err(Error::config(&[key], "must be positive"));
                }
            }
        }
        Ok(())
    }
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self::desk()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_are_valid() {
        ScenarioConfig::desk().validate().unwrap();
        ScenarioConfig::paper().validate().unwrap();
    }

    #[test]
    fn paper_preset_matches_reference_table() {
        let p = ScenarioConfig::paper();
        assert_eq!((p.rx_antennas, p.rx_rf_chains, p.subcarriers, p.pilot_blocks), (48, 8, 64, 20));
        assert_eq!((p.num_users, p.nlos_clusters, p.delay_taps), (3, 3, 3));
        assert_eq!((p.grid_rx, p.grid_tx, p.phase_bits), (96, 8, 4));
        assert_eq!(p.adc_bits, AdcBits::Finite(3));
        assert!((p.carrier_hz - 0.65e12).abs() < 1.0);
        assert!((p.bandwidth_hz - 5e9).abs() < 1.0);
        assert!((p.rrc_rolloff - 0.8).abs() < 1e-12);
        assert_eq!((p.bgsr_threshold(), p.bgsr_kmax), (1.0, 20));
        assert!((p.gsmp_threshold() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn frame_structure_violation_names_all_keys() {
        let cfg = ScenarioConfig { pilots_per_block: 10, ..ScenarioConfig::desk() };
        let err = cfg.validate().unwrap_err().to_string();
        for key in ["subcarriers", "pilots_per_block", "delay_taps"] {
            assert!(err.contains(key), "{err}");
        }
    }

    #[test]
    fn hybrid_constraint_enforced() {
        let cfg = ScenarioConfig { rx_rf_chains: 17, ..ScenarioConfig::desk() };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn adc_bits_parse_and_serde() {
        assert_eq!("inf".parse::<AdcBits>().unwrap(), AdcBits::Infinite);
        assert_eq!("4".parse::<AdcBits>().unwrap(), AdcBits::Finite(4));
        let v: AdcBits = serde_json::from_str("\"inf\"").unwrap();
        assert_eq!(v, AdcBits::Infinite);
        let v: AdcBits = serde_json::from_str("2").unwrap();
        assert_eq!(v, AdcBits::Finite(2));
        assert_eq!(serde_json::to_string(&AdcBits::Infinite).unwrap(), "\"inf\"");
    }

    #[test]
    fn snr_round_trip() {
        let cfg = ScenarioConfig::desk().with_snr_db(10.0);
        assert!((cfg.noise_var - 0.1).abs() < 1e-15);
        assert!((cfg.snr_db() - 10.0).abs() < 1e-12);
    }
}
