//! Command-line front end.

use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};

use super::spec::{load_config, LoadedConfig};
use super::sweep::{run_sweep, write_csv_file};
use super::trial::TrialOptions;
use crate::config::{AdcBits, PulseShape};
use crate::dictionary::DictionaryMode;
use crate::error::{Error, Result};
use crate::estimators::Algorithm;

pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "thz-bgsr", version, about = "Monte Carlo channel-estimation sweeps for THz hybrid MIMO")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a sweep and write the summary CSV.
    Run(RunArgs),
    /// Parse and validate a configuration without running anything.
    Validate(ConfigArgs),
    /// Evaluate the plug-in BCRB over the configured sweep.
    Bcrb {
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Args)]
pub struct ConfigArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// desk or paper
    #[arg(long)]
    pub preset: Option<String>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub config: ConfigArgs,
    /// Comma-separated SNR points in dB.
    #[arg(long)]
    pub snr: Option<String>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Comma-separated subset of bgsr,gsmp,omp,sbl,genie.
    #[arg(long)]
    pub algorithms: Option<String>,
    /// Bits per ADC or `inf`.
    #[arg(long)]
    pub adc_bits: Option<String>,
    /// rrc or rect
    #[arg(long)]
    pub psf: Option<String>,
    /// on_grid or tbod
    #[arg(long)]
    pub dict: Option<String>,
    /// Output CSV; defaults to `output_path` from the config.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn flag_error(flag: &str, msg: impl Into<String>) -> Error {
    Error::Config { keys: flag.to_string(), message: msg.into() }
}

fn split_list(s: &str) -> impl Iterator<Item = &str> {
    s.split(',').map(str::trim).filter(|t| !t.is_empty())
}

/// Applies command-line overrides on top of a loaded configuration.
pub fn apply_overrides(loaded: &mut LoadedConfig, args: &RunArgs) -> Result<()> {
    let (cfg, sweep) = (&mut loaded.scenario, &mut loaded.sweep);
    if let Some(s) = &args.snr {
        sweep.snr_db_list = split_list(s)
            .map(|t| t.parse::<f64>().map_err(|_| flag_error("--snr", format!("'{t}' is not a number"))))
            .collect::<Result<_>>()?;
    }
    if let Some(t) = args.trials {
        sweep.trials = t;
    }
    if let Some(s) = args.seed {
        cfg.rng_seed = s;
    }
    if let Some(a) = &args.algorithms {
        sweep.algorithms = split_list(a)
            .map(|t| Algorithm::from_str(t).map_err(|e| flag_error("--algorithms", e.to_string())))
            .collect::<Result<_>>()?;
    }
    if let Some(b) = &args.adc_bits {
        cfg.adc_bits = AdcBits::from_str(b).map_err(|e| flag_error("--adc-bits", e.to_string()))?;
    }
    if let Some(p) = &args.psf {
        cfg.psf = match p.as_str() {
            "rrc" => PulseShape::Rrc,
            "rect" => PulseShape::Rect,
            _ => return Err(flag_error("--psf", format!("unknown pulse shape '{p}'"))),
        };
    }
    if let Some(d) = &args.dict {
        sweep.dictionary_mode = match d.as_str() {
            "on_grid" => DictionaryMode::OnGrid,
            "tbod" => DictionaryMode::Tbod,
            _ => return Err(flag_error("--dict", format!("unknown dictionary mode '{d}'"))),
        };
    }
    cfg.validate()?;
    sweep.validate()
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Validate(c) => {
            let loaded = load_config(&c.config, c.preset.as_deref())?;
            println!(
                "ok: preset {}, {} sweep points, {} trials",
                loaded.preset,
                loaded.sweep.points(&loaded.scenario)?.len(),
                loaded.sweep.trials
            );
            Ok(())
        }
        Command::Run(args) => {
            let mut loaded = load_config(&args.config.config, args.config.preset.as_deref())?;
            apply_overrides(&mut loaded, &args)?;
            let out = args
                .out
                .clone()
                .or_else(|| loaded.sweep.output_path.clone())
                .ok_or_else(|| flag_error("--out", "no output path given"))?;
            let result = run_sweep(&loaded.scenario, &loaded.sweep, TrialOptions::default())?;
            write_csv_file(&result.rows, &out)?;
            eprintln!("wrote {} rows to {}", result.rows.len(), out.display());
            Ok(())
        }
        Command::Bcrb { config, out } => {
            let mut loaded = load_config(&config.config, config.preset.as_deref())?;
            loaded.sweep.algorithms = vec![Algorithm::Bgsr];
            let options = TrialOptions { ber: false, bcrb: true };
            let result = run_sweep(&loaded.scenario, &loaded.sweep, options)?;
            let rows: Vec<_> = result.rows.into_iter().filter(|r| r.algorithm == "bcrb").collect();
            write_csv_file(&rows, &out)?;
            eprintln!("wrote {} rows to {}", rows.len(), out.display());
            Ok(())
        }
    }
}

/// Exit status for an error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config { .. } => EXIT_CONFIG,
        Error::Numerical(_) | Error::InvalidInput(_) => EXIT_NUMERICAL,
        Error::Io(_) | Error::Csv(_) => 1,
    }
}

/// Parses `args` and runs the command, returning the process exit status.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { 0 };
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
