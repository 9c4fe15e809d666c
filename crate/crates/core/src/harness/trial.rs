//! One Monte Carlo trial: channel draw, pilot measurements, estimation and metrics.

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::channel::{generate_channel, Environment, MultiUserChannel};
use crate::config::{NoiseCovarianceMode, ScenarioConfig};
use crate::dictionary::{build_sensing_tensor, SparsifyingDictionary};
use crate::error::Result;
use crate::estimators::{estimate, Algorithm, BgsrParams, EstimatorOutput, EstimatorSettings};
use crate::frontend::{sample_noise_covariance, synthesize_measurements, MeasurementSet, PilotFrame, QuantizationModel, RfCodebook};
use crate::linalg::{frob2, CMat};
use crate::metrics::{bcrb, effective_channel, significant_gamma, mmse_equalize_detect, squared_error, BerCount, Psk};

/// The plug-in bound keeps atoms with `γ̂ > BCRB_SUPPORT_RELATIVE · max(γ̂)`.
pub const BCRB_SUPPORT_RELATIVE: f64 = 0.01;

/// Independent random streams of a trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum Stream {
    Channel = 1,
    Codebook = 2,
    Pilots = 3,
    Noise = 4,
    NoiseSamples = 5,
    Data = 6,
}

/// Generator keyed by `(seed, trial, stream)`; identical on every thread and
/// at every sweep point.
pub fn trial_rng(seed: u64, trial: u64, stream: Stream) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&trial.to_le_bytes());
    key[16] = stream as u8;
    ChaCha8Rng::from_seed(key)
}

pub fn estimator_settings(cfg: &ScenarioConfig) -> EstimatorSettings {
    EstimatorSettings {
        bgsr: BgsrParams { eps: cfg.bgsr_threshold(), k_max: cfg.bgsr_kmax, ..Default::default() },
        gsmp_eps0: cfg.gsmp_threshold(),
        ..Default::default()
    }
}

/// Everything an estimator sees in one trial, plus the ground truth.
#[derive(Debug, Clone)]
pub struct TrialData {
    pub channel: MultiUserChannel,
    pub codebooks: RfCodebook,
    pub measurements: MeasurementSet,
    /// Noise covariance handed to the estimators (known or sampled).
    pub c_w: CMat,
    pub xi: Vec<CMat>,
}

pub fn draw_trial(cfg: &ScenarioConfig, dict: &SparsifyingDictionary, env: &Environment, seed: u64, trial: u64) -> Result<TrialData> {
    let channel = generate_channel(cfg, env, &mut trial_rng(seed, trial, Stream::Channel))?;
    let codebooks = RfCodebook::draw(cfg, &mut trial_rng(seed, trial, Stream::Codebook));
    let pilots = PilotFrame::draw(cfg, &mut trial_rng(seed, trial, Stream::Pilots));
    let quant = QuantizationModel::new(cfg.adc_bits)?;
    let mut noise = trial_rng(seed, trial, Stream::Noise);
    let measurements = synthesize_measurements(cfg, &channel, &codebooks, &pilots, &quant, Some(&mut noise))?;
    let c_w = match cfg.noise_covariance {
        NoiseCovarianceMode::Known => measurements.c_w.clone(),
        NoiseCovarianceMode::Sampled => sample_noise_covariance(
            &measurements.rvv,
            cfg.noise_cov_samples,
            &mut trial_rng(seed, trial, Stream::NoiseSamples),
        )?,
    };
    let xi = build_sensing_tensor(&measurements, dict)?;
    Ok(TrialData { channel, codebooks, measurements, c_w, xi })
}

#[derive(Debug, Clone)]
pub struct AlgorithmOutcome {
    pub algorithm: Algorithm,
    /// `None` for the genie.
    pub nmse: Option<f64>,
    pub squared_error: Option<f64>,
    pub ber: BerCount,
    pub iterations: usize,
    pub wall_time: f64,
    pub trace: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct TrialOutcome {
    pub trial: u64,
    /// `Σ_k ‖H[k]‖_F²`.
    pub channel_energy: f64,
    pub algorithms: Vec<AlgorithmOutcome>,
    /// Plug-in bound on the squared error, present when BGSR ran.
    pub bcrb: Option<f64>,
}

impl TrialOutcome {
    pub fn get(&self, a: Algorithm) -> Option<&AlgorithmOutcome> {
        self.algorithms.iter().find(|o| o.algorithm == a)
    }
}

/// Bit errors over every subcarrier when detecting with `h_hat`, using the
/// first pilot block's RF codebooks and noise covariance for the data phase.
pub fn data_phase_ber(cfg: &ScenarioConfig, data: &TrialData, h_hat: &[CMat], seed: u64, trial: u64) -> Result<BerCount> {
    let psk = Psk::new(cfg.constellation)?;
    let meas = &data.measurements;
    let rvv = &meas.rvv[0];
    let noise_var = (0..rvv.nrows()).map(|i| rvv[(i, i)].re).sum::<f64>() / rvv.nrows() as f64;
    let mut rng = trial_rng(seed, trial, Stream::Data);
    let mut total = BerCount::default();
    for (k, h) in data.channel.cfr.iter().enumerate() {
        let he = effective_channel(h, &meas.dw[0], &data.codebooks.f_rf[0])?;
        let he_hat = effective_channel(&h_hat[k], &meas.dw[0], &data.codebooks.f_rf[0])?;
        total.merge(mmse_equalize_detect(&he, &he_hat, Some(rvv), noise_var, cfg.pilot_power, psk, cfg.data_vectors, &mut rng)?);
    }
    Ok(total)
}

/// Options that change what a trial computes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrialOptions {
    pub ber: bool,
    pub bcrb: bool,
}

impl Default for TrialOptions {
    fn default() -> Self {
        TrialOptions { ber: true, bcrb: true }
    }
}

pub fn run_estimators(
    cfg: &ScenarioConfig,
    dict: &SparsifyingDictionary,
    data: &TrialData,
    algorithms: &[Algorithm],
) -> Result<Vec<(Algorithm, Option<EstimatorOutput>)>> {
    let settings = estimator_settings(cfg);
    algorithms
        .iter()
        .map(|&a| match a {
            Algorithm::Genie => Ok((a, None)),
            _ => Ok((a, Some(estimate(a, &data.xi, &data.measurements.y_mu, &data.c_w, dict, &settings)?))),
        })
        .collect()
}

pub fn run_trial(
    cfg: &ScenarioConfig,
    dict: &SparsifyingDictionary,
    env: &Environment,
    algorithms: &[Algorithm],
    options: TrialOptions,
    seed: u64,
    trial: u64,
) -> Result<TrialOutcome> {
    let data = draw_trial(cfg, dict, env, seed, trial)?;
    let truth = &data.channel.cfr;
    let channel_energy: f64 = truth.iter().map(frob2).sum();
    let mut outcomes = Vec::with_capacity(algorithms.len());
    let mut bound = None;
    for (a, out) in run_estimators(cfg, dict, &data, algorithms)? {
        let start = Instant::now();
        let (h_hat, nmse, se, iterations, trace, wall) = match &out {
            Some(o) => {
                let se = squared_error(&o.h_hat, truth);
                (&o.h_hat, Some(se / channel_energy), Some(se), o.iterations, o.trace.clone(), o.wall_time)
            }
            None => (truth, None, None, 0, Vec::new(), 0.0),
        };
        let ber = if options.ber { data_phase_ber(cfg, &data, h_hat, seed, trial)? } else { BerCount::default() };
        if options.bcrb && a == Algorithm::Bgsr {
            if let Some(g) = out.as_ref().and_then(|o| o.gamma.as_ref()) {
                if g.iter().any(|x| *x > 0.0) {
                    let g = significant_gamma(g, BCRB_SUPPORT_RELATIVE);
                    bound = Some(bcrb(&data.xi, &data.c_w, &g, dict, channel_energy)?.bound);
                }
            }
        }
        let wall_time = if out.is_some() { wall } else { start.elapsed().as_secs_f64() };
        outcomes.push(AlgorithmOutcome { algorithm: a, nmse, squared_error: se, ber, iterations, wall_time, trace });
    }
    Ok(TrialOutcome { trial, channel_energy, algorithms: outcomes, bcrb: bound })
}
