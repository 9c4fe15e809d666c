//! Pilot frames and the stacked per-subcarrier measurement model.

use rand::Rng;
use rustfft::FftPlanner;

use super::codebook::RfCodebook;
use super::covariance::{effective_noise_covariance, quantizer_noise_covariance, signal_covariance_q};
use super::quantization::{uniform_quantizer, QuantizationModel};
use crate::channel::MultiUserChannel;
use crate::config::ScenarioConfig;
use crate::error::{Error, Result};
use crate::linalg::{blkdiag, cholesky, crandn_vec, CMat, CVec, C64};

/// QPSK pilot sequences, time domain and zero-padded frequency domain.
#[derive(Debug, Clone)]
pub struct PilotFrame {
    /// `[m][u]`, shape `N_RFu_T × N_p`.
    pub time: Vec<Vec<CMat>>,
    /// `[m][u]`, shape `N_RFu_T × K`; column `k` is `a_{m,u}[k]`.
    pub freq: Vec<Vec<CMat>>,
}

impl PilotFrame {
    pub fn draw<R: Rng + ?Sized>(cfg: &ScenarioConfig, rng: &mut R) -> Self {
        let amp = (cfg.pilot_power / 2.0).sqrt();
        let mut time = Vec::with_capacity(cfg.pilot_blocks);
        for _ in 0..cfg.pilot_blocks {
            time.push(
                (0..cfg.num_users)
                    .map(|_| {
                        CMat::from_fn(cfg.tx_rf_chains, cfg.pilots_per_block, |_, _| {
                            let re = if rng.random::<bool>() { amp } else { -amp };
                            let im = if rng.random::<bool>() { amp } else { -amp };
                            C64::new(re, im)
                        })
                    })
                    .collect::<Vec<_>>(),
            );
        }
        let freq = time
            .iter()
            .map(|users| users.iter().map(|x| to_frequency(x, cfg.subcarriers)).collect())
            .collect();
        PilotFrame { time, freq }
    }
}

/// Zero-pads each row of `x` to `kk` samples and applies `FFT/√N_p`.
fn to_frequency(x: &CMat, kk: usize) -> CMat {
    let np = x.ncols();
    let fft = FftPlanner::<f64>::new().plan_fft_forward(kk);
    let scale = 1.0 / (np as f64).sqrt();
    let mut out = CMat::zeros(x.nrows(), kk);
    let mut buf = vec![C64::new(0.0, 0.0); kk];
    for r in 0..x.nrows() {
        buf.iter_mut().for_each(|z| *z = C64::new(0.0, 0.0));
        for n in 0..np {
            buf[n] = x[(r, n)];
        }
        fft.process(&mut buf);
        for k in 0..kk {
            out[(r, k)] = buf[k] * scale;
        }
    }
    out
}

/// Stacked pilot outputs with everything needed to build the sensing tensor.
#[derive(Debug, Clone)]
pub struct MeasurementSet {
    /// `M·N_RF_R × K`.
    pub y_mu: CMat,
    /// Block-diagonal `blkdiag(R_vv,1, …, R_vv,M)`.
    pub c_w: CMat,
    pub rvv: Vec<CMat>,
    /// `[m][k]` effective transmit vectors `s_{m,MU}[k]` of length `U·N_Tu`.
    pub s: Vec<Vec<CVec>>,
    /// `[m]` quantizer-scaled combiners `D W_m^H` (`N_RF_R × N_R`).
    pub dw: Vec<CMat>,
    pub quant: QuantizationModel,
}

impl MeasurementSet {
    pub fn blocks(&self) -> usize {
        self.dw.len()
    }

    pub fn rf_chains(&self) -> usize {
        self.dw[0].nrows()
    }

    pub fn subcarriers(&self) -> usize {
        self.y_mu.ncols()
    }

    /// `Λ_{m,MU}[k] = s^T ⊗ D W^H`, shape `N_RF_R × N_R·N_T`.
    pub fn lambda(&self, m: usize, k: usize) -> CMat {
        let s = &self.s[m][k];
        CMat::from_row_slice(1, s.len(), s.as_slice()).kronecker(&self.dw[m])
    }
}

fn transmit_vectors(cfg: &ScenarioConfig, codebooks: &RfCodebook, pilots: &PilotFrame) -> Vec<Vec<CVec>> {
    let ntu = cfg.tx_antennas_per_user;
    (0..cfg.pilot_blocks)
        .map(|m| {
            (0..cfg.subcarriers)
                .map(|k| {
                    let mut s = CVec::zeros(ntu * cfg.num_users);
                    for u in 0..cfg.num_users {
                        let su = &codebooks.f_rf[m][u] * pilots.freq[m][u].column(k);
                        s.rows_mut(u * ntu, ntu).copy_from(&su);
                    }
                    s
                })
                .collect()
        })
        .collect()
}

/// Per-block effective noise covariances `R_vv,m`.
pub fn block_noise_covariances(
    cfg: &ScenarioConfig,
    channel: &MultiUserChannel,
    codebooks: &RfCodebook,
    quant: &QuantizationModel,
) -> Result<Vec<CMat>> {
    let eps = quant.epsilon;
    (0..cfg.pilot_blocks)
        .map(|m| {
            let w = &codebooks.w_rf[m];
            let c_m = if eps < 1.0 {
                let rxx: Vec<CMat> = codebooks.f_rf[m]
                    .iter()
                    .map(|f| f * f.adjoint() * C64::new(cfg.pilot_power, 0.0))
                    .collect();
                let q = signal_covariance_q(&channel.taps, &rxx)?;
                quantizer_noise_covariance(w, &q, cfg.noise_var, eps)
            } else {
                CMat::zeros(w.ncols(), w.ncols())
            };
            effective_noise_covariance(w, &c_m, eps, cfg.noise_var)
        })
        .collect()
}

/// Builds `Y_MU` through the Bussgang-linearized model `D W^H H[k] s[k] + v`.
/// Passing `None` for `noise_rng` gives the noiseless outputs.
pub fn synthesize_measurements<R: Rng + ?Sized>(
    cfg: &ScenarioConfig,
    channel: &MultiUserChannel,
    codebooks: &RfCodebook,
    pilots: &PilotFrame,
    quant: &QuantizationModel,
    noise_rng: Option<&mut R>,
) -> Result<MeasurementSet> {
    if cfg.subcarriers != cfg.pilots_per_block + cfg.delay_taps - 1 {
        return Err(Error::config(
            &["subcarriers", "pilots_per_block", "delay_taps"],
            "zero-padded frame requires subcarriers = pilots_per_block + delay_taps - 1",
        ));
    }
    if channel.subcarriers() != cfg.subcarriers
        || channel.cfr[0].shape() != (cfg.rx_antennas, cfg.total_tx_antennas())
        || codebooks.w_rf.len() != cfg.pilot_blocks
        || pilots.freq.len() != cfg.pilot_blocks
    {
        return Err(Error::input("channel, codebook or pilot dimensions do not match the scenario"));
    }
    let (nrf, kk) = (cfg.rx_rf_chains, cfg.subcarriers);
    let d = C64::new(quant.epsilon, 0.0);
    let dw: Vec<CMat> = codebooks.w_rf.iter().map(|w| w.adjoint() * d).collect();
    let s = transmit_vectors(cfg, codebooks, pilots);
    let rvv = block_noise_covariances(cfg, channel, codebooks, quant)?;

    let mut y_mu = CMat::zeros(cfg.measurement_rows(), kk);
    for m in 0..cfg.pilot_blocks {
        for k in 0..kk {
            let y = &dw[m] * (&channel.cfr[k] * &s[m][k]);
            y_mu.view_mut((m * nrf, k), (nrf, 1)).copy_from(&y);
        }
    }
    if let Some(rng) = noise_rng {
        for (m, r) in rvv.iter().enumerate() {
            let l = cholesky(r)?.l();
            for k in 0..kk {
                let v = &l * crandn_vec(nrf, rng);
                let mut col = y_mu.view_mut((m * nrf, k), (nrf, 1));
                col += v;
            }
        }
    }
    Ok(MeasurementSet { y_mu, c_w: blkdiag(&rvv), rvv, s, dw, quant: *quant })
}

/// Block-diagonal sample covariance built from `samples` draws of each block's noise.
pub fn sample_noise_covariance<R: Rng + ?Sized>(rvv: &[CMat], samples: usize, rng: &mut R) -> Result<CMat> {
    if samples == 0 {
        return Err(Error::input("sample covariance needs at least one draw"));
    }
    let blocks = rvv
        .iter()
        .map(|r| {
            let n = r.nrows();
            let l = cholesky(r)?.l();
            let mut acc = CMat::zeros(n, n);
            for _ in 0..samples {
                let v = &l * crandn_vec(n, rng);
                acc += &v * v.adjoint();
            }
            Ok(acc / C64::new(samples as f64, 0.0))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(blkdiag(&blocks))
}

/// ADC treatment for the time-domain reference path.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TimeDomainAdc {
    /// Scale by the Bussgang gain `ε`.
    Linearized,
    /// Apply the uniform midrise quantizer to every RF chain's samples.
    Uniform,
}

/// Noiseless time-domain synthesis: circular convolution of the taps with the
/// zero-padded pilots, combining, ADC, then `FFT/√N_p` per RF chain.
pub fn time_domain_output(
    cfg: &ScenarioConfig,
    channel: &MultiUserChannel,
    codebooks: &RfCodebook,
    pilots: &PilotFrame,
    quant: &QuantizationModel,
    adc: TimeDomainAdc,
) -> Result<CMat> {
    let (nrf, kk, ntu) = (cfg.rx_rf_chains, cfg.subcarriers, cfg.tx_antennas_per_user);
    let nt = cfg.total_tx_antennas();
    let fft = FftPlanner::<f64>::new().plan_fft_forward(kk);
    let scale = 1.0 / (cfg.pilots_per_block as f64).sqrt();
    let mut out = CMat::zeros(cfg.measurement_rows(), kk);
    for m in 0..cfg.pilot_blocks {
        let mut tx = CMat::zeros(nt, kk);
        for u in 0..cfg.num_users {
            let xu = &codebooks.f_rf[m][u] * &pilots.time[m][u];
            tx.view_mut((u * ntu, 0), (ntu, xu.ncols())).copy_from(&xu);
        }
        let wh = codebooks.w_rf[m].adjoint();
        let mut y = CMat::zeros(nrf, kk);
        for n in 0..kk {
            let mut r = CVec::zeros(cfg.rx_antennas);
            for (l, h) in channel.taps.iter().enumerate() {
                r += h * tx.column((n + kk - l) % kk);
            }
            y.set_column(n, &(&wh * r));
        }
        for c in 0..nrf {
            let mut row: Vec<C64> = y.row(c).iter().cloned().collect();
            row = match adc {
                TimeDomainAdc::Linearized => row.into_iter().map(|z| z * quant.epsilon).collect(),
                TimeDomainAdc::Uniform => uniform_quantizer(&row, quant.bits)?,
            };
            fft.process(&mut row);
            for k in 0..kk {
                out[(m * nrf + c, k)] = row[k] * scale;
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{generate_channel, Environment};
    use crate::config::AdcBits;
    use crate::linalg::{frob2, hermitian_deviation, min_eigenvalue};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn setup(cfg: &ScenarioConfig, seed: u64) -> (MultiUserChannel, RfCodebook, PilotFrame) {
        let env = Environment::from_config(cfg).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ch = generate_channel(cfg, &env, &mut rng).unwrap();
        let cb = RfCodebook::draw(cfg, &mut rng);
        let p = PilotFrame::draw(cfg, &mut rng);
        (ch, cb, p)
    }

    #[test]
    fn pilot_power_in_frequency_domain() {
        let cfg = ScenarioConfig {
            pilots_per_block: 40,
            subcarriers: 42,
            pilot_blocks: 30,
            ..ScenarioConfig::desk()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let p = PilotFrame::draw(&cfg, &mut rng);
        let mut acc = CMat::zeros(cfg.tx_rf_chains, cfg.tx_rf_chains);
        let mut count = 0.0;
        for a in p.freq.iter().flatten() {
            for k in 0..cfg.subcarriers {
                let c = a.column(k);
                acc += &c * c.adjoint();
                count += 1.0;
            }
        }
        let mean = acc / C64::new(count, 0.0);
        assert!((mean[(0, 0)].re - cfg.pilot_power).abs() < 0.1 * cfg.pilot_power);
    }

    #[test]
    fn lambda_kronecker_identity() {
        let cfg = ScenarioConfig::desk();
        let (ch, cb, p) = setup(&cfg, 3);
        let q = QuantizationModel::new(cfg.adc_bits).unwrap();
        let ms = synthesize_measurements::<ChaCha8Rng>(&cfg, &ch, &cb, &p, &q, None).unwrap();
        for (m, k) in [(0, 0), (3, 7), (7, 15)] {
            let lam = ms.lambda(m, k);
            assert_eq!(lam.shape(), (cfg.rx_rf_chains, cfg.rx_antennas * cfg.total_tx_antennas()));
            let vec_h = CVec::from_column_slice(ch.cfr[k].as_slice());
            let lhs = &lam * vec_h;
            let rhs = &ms.dw[m] * (&ch.cfr[k] * &ms.s[m][k]);
            assert!((lhs - &rhs).norm() < 1e-12 * rhs.norm().max(1.0));
            let y = ms.y_mu.view((m * cfg.rx_rf_chains, k), (cfg.rx_rf_chains, 1));
            assert!((y - rhs).norm() < 1e-12);
        }
    }

    #[test]
    fn covariance_block_structure() {
        let cfg = ScenarioConfig::desk();
        let (ch, cb, p) = setup(&cfg, 4);
        let q = QuantizationModel::new(cfg.adc_bits).unwrap();
        let ms = synthesize_measurements::<ChaCha8Rng>(&cfg, &ch, &cb, &p, &q, None).unwrap();
        assert!(hermitian_deviation(&ms.c_w) < 1e-12);
        assert!(min_eigenvalue(&ms.c_w) > 0.0);
        assert!(cholesky(&ms.c_w).is_ok());
        let n = cfg.rx_rf_chains;
        for i in 0..ms.c_w.nrows() {
            for j in 0..ms.c_w.ncols() {
                if i / n != j / n {
                    assert_eq!(ms.c_w[(i, j)], C64::new(0.0, 0.0));
                }
            }
        }
    }

    #[test]
    fn infinite_resolution_noiseless_equals_ideal_output() {
        let cfg = ScenarioConfig { adc_bits: AdcBits::Infinite, ..ScenarioConfig::desk() };
        let (ch, cb, p) = setup(&cfg, 5);
        let q = QuantizationModel::new(cfg.adc_bits).unwrap();
        let ms = synthesize_measurements::<ChaCha8Rng>(&cfg, &ch, &cb, &p, &q, None).unwrap();
        for m in 0..cfg.pilot_blocks {
            for k in 0..cfg.subcarriers {
                let ideal = cb.w_rf[m].adjoint() * (&ch.cfr[k] * &ms.s[m][k]);
                let got = ms.y_mu.view((m * cfg.rx_rf_chains, k), (cfg.rx_rf_chains, 1)).into_owned();
                assert_eq!(got, ideal);
            }
        }
    }

    #[test]
    fn time_domain_matches_frequency_model() {
        let cfg = ScenarioConfig::desk();
        let (ch, cb, p) = setup(&cfg, 6);
        let q = QuantizationModel::new(cfg.adc_bits).unwrap();
        let ms = synthesize_measurements::<ChaCha8Rng>(&cfg, &ch, &cb, &p, &q, None).unwrap();
        let td = time_domain_output(&cfg, &ch, &cb, &p, &q, TimeDomainAdc::Linearized).unwrap();
        assert!((frob2(&(&td - &ms.y_mu)) / frob2(&ms.y_mu)).sqrt() < 1e-10);
    }

    #[test]
    fn drawn_noise_has_model_covariance() {
        let cfg = ScenarioConfig { pilot_blocks: 1, ..ScenarioConfig::desk() };
        let (ch, cb, p) = setup(&cfg, 7);
        let q = QuantizationModel::new(cfg.adc_bits).unwrap();
        let clean = synthesize_measurements::<ChaCha8Rng>(&cfg, &ch, &cb, &p, &q, None).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let n = cfg.rx_rf_chains;
        let mut acc = CMat::zeros(n, n);
        let mut count = 0;
        while count < 10_000 {
            let noisy = synthesize_measurements(&cfg, &ch, &cb, &p, &q, Some(&mut rng)).unwrap();
            let v = &noisy.y_mu - &clean.y_mu;
            for k in 0..cfg.subcarriers {
                let c = v.column(k);
                acc += &c * c.adjoint();
                count += 1;
            }
        }
        let est = acc / C64::new(count as f64, 0.0);
        assert!((&est - &clean.rvv[0]).norm() < 0.05 * clean.rvv[0].norm());
    }

    #[test]
    fn rejects_broken_frame_structure() {
        let cfg = ScenarioConfig::desk();
        let (ch, cb, p) = setup(&cfg, 8);
        let q = QuantizationModel::new(cfg.adc_bits).unwrap();
        let bad = ScenarioConfig { pilots_per_block: 13, ..cfg };
        let err = synthesize_measurements::<ChaCha8Rng>(&bad, &ch, &cb, &p, &q, None).unwrap_err();
        assert!(matches!(err, Error::Config { .. }));
    }

    #[test]
    fn sampled_covariance_is_close() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let r = CMat::from_diagonal_element(3, 3, C64::new(0.5, 0.0));
        let est = sample_noise_covariance(&[r.clone(), r.clone()], 20_000, &mut rng).unwrap();
        assert!((est.view((0, 0), (3, 3)) - &r).norm() < 0.03);
        assert_eq!(est[(0, 4)], C64::new(0.0, 0.0));
    }
}
