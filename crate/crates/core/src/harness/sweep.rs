//! Monte Carlo sweeps, aggregation and CSV output.

use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

use super::spec::{SweepPoint, SweepSpec};
use super::trial::{run_trial, TrialOptions, TrialOutcome};
use crate::channel::Environment;
use crate::config::ScenarioConfig;
use crate::dictionary::SparsifyingDictionary;
use crate::error::{Error, Result};
use crate::estimators::Algorithm;
use crate::metrics::to_db;

/// Tag written to every CSV row.
pub const REVISION: &str = concat!("v", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRow {
    pub sweep_value: String,
    pub algorithm: String,
    pub metric: String,
    pub mean: f64,
    pub stderr: f64,
    pub trials: usize,
    pub config_hash: String,
    pub seed: u64,
    pub revision: String,
}

#[derive(Debug, Clone)]
pub struct PointOutcome {
    pub label: String,
    pub trials: Vec<TrialOutcome>,
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    pub config_hash: String,
    pub seed: u64,
    pub points: Vec<PointOutcome>,
    pub rows: Vec<ResultRow>,
}

/// First 16 hex digits of the SHA-256 of the canonical JSON of both configs.
pub fn config_hash(cfg: &ScenarioConfig, sweep: &SweepSpec) -> String {
    let mut sweep = sweep.clone();
    sweep.output_path = None;
    let text = serde_json::to_string(&(cfg, &sweep)).expect("configs serialize");
    Sha256::digest(text.as_bytes()).iter().take(8).map(|b| format!("{b:02x}")).collect()
}

/// Sample mean and standard error of the mean.
pub fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Runs every trial of one scenario. Trials execute in parallel and come back
/// in trial order.
pub fn run_point(
    cfg: &ScenarioConfig,
    sweep: &SweepSpec,
    options: TrialOptions,
    seed: u64,
) -> Result<Vec<TrialOutcome>> {
    cfg.validate()?;
    let dict = SparsifyingDictionary::new(cfg, sweep.dictionary_mode)?;
    let env = Environment::from_config(cfg)?;
    (0..sweep.trials as u64)
        .into_par_iter()
        .map(|t| run_trial(cfg, &dict, &env, &sweep.algorithms, options, seed, t))
        .collect()
}

pub fn run_sweep(cfg: &ScenarioConfig, sweep: &SweepSpec, options: TrialOptions) -> Result<SweepResult> {
    let points: Vec<SweepPoint> = sweep.points(cfg)?;
    let seed = cfg.rng_seed;
    let hash = config_hash(cfg, sweep);
    let mut outcomes = Vec::with_capacity(points.len());
    let mut rows = Vec::new();
    for p in &points {
        let trials = run_point(&p.cfg, sweep, options, seed)?;
        rows.extend(aggregate(&p.label, &trials, &sweep.algorithms, &hash, seed));
        outcomes.push(PointOutcome { label: p.label.clone(), trials });
    }
    Ok(SweepResult { config_hash: hash, seed, points: outcomes, rows })
}

/// Summary rows of one sweep point.
pub fn aggregate(label: &str, trials: &[TrialOutcome], algorithms: &[Algorithm], hash: &str, seed: u64) -> Vec<ResultRow> {
    let n = trials.len();
    let row = |alg: &str, metric: &str, (mean, stderr): (f64, f64)| ResultRow {
        sweep_value: label.to_string(),
        algorithm: alg.to_string(),
        metric: metric.to_string(),
        mean,
        stderr,
        trials: n,
        config_hash: hash.to_string(),
        seed,
        revision: REVISION.to_string(),
    };
    let mut rows = Vec::new();
    for &a in algorithms {
        let outs: Vec<_> = trials.iter().filter_map(|t| t.get(a)).collect();
        if a != Algorithm::Genie {
            let nmse: Vec<f64> = outs.iter().filter_map(|o| o.nmse).collect();
            let (m, s) = mean_stderr(&nmse);
            rows.push(row(a.name(), "nmse", (m, s)));
            rows.push(row(a.name(), "nmse_db", (to_db(m), 10.0 / std::f64::consts::LN_10 * s / m)));
            let se: Vec<f64> = outs.iter().filter_map(|o| o.squared_error).collect();
            rows.push(row(a.name(), "mse", mean_stderr(&se)));
            let it: Vec<f64> = outs.iter().map(|o| o.iterations as f64).collect();
            rows.push(row(a.name(), "iterations", mean_stderr(&it)));
            let wt: Vec<f64> = outs.iter().map(|o| o.wall_time).collect();
            rows.push(row(a.name(), "wall_time", mean_stderr(&wt)));
        }
        if outs.iter().any(|o| o.ber.bits > 0) {
            let errors: u64 = outs.iter().map(|o| o.ber.errors).sum();
            let bits: u64 = outs.iter().map(|o| o.ber.bits).sum();
            let per: Vec<f64> = outs.iter().map(|o| o.ber.rate()).collect();
            rows.push(row(a.name(), "ber", (errors as f64 / bits as f64, mean_stderr(&per).1)));
        }
    }
    let bounds: Vec<f64> = trials.iter().filter_map(|t| t.bcrb).collect();
    if !bounds.is_empty() {
        let energy = trials.iter().filter(|t| t.bcrb.is_some()).map(|t| t.channel_energy).sum::<f64>() / bounds.len() as f64;
        let (m, s) = mean_stderr(&bounds);
        rows.push(row("bcrb", "mse", (m, s)));
        rows.push(row("bcrb", "nmse", (m / energy, s / energy)));
        rows.push(row("bcrb", "nmse_db", (to_db(m / energy), 10.0 / std::f64::consts::LN_10 * s / m)));
    }
    rows
}

pub fn write_csv<W: Write>(rows: &[ResultRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_csv_file(rows: &[ResultRow], path: &Path) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    let f = std::fs::File::create(path).map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))?;
    write_csv(rows, std::io::BufWriter::new(f))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mean_stderr_reference() {
        let (m, s) = mean_stderr(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m, 2.5);
        // sample variance 5/3 over 4 samples
        assert!((s - (5.0f64 / 12.0).sqrt()).abs() < 1e-12);
        assert_eq!(mean_stderr(&[7.0]), (7.0, 0.0));
    }

    #[test]
    fn hash_ignores_output_path() {
        let cfg = ScenarioConfig::desk();
        let a = SweepSpec::default();
        let b = SweepSpec { output_path: Some("x.csv".into()), ..Default::default() };
        assert_eq!(config_hash(&cfg, &a), config_hash(&cfg, &b));
        assert_eq!(config_hash(&cfg, &a).len(), 16);
        assert_ne!(config_hash(&cfg.clone().with_snr_db(3.0), &a), config_hash(&cfg, &a));
    }
}
