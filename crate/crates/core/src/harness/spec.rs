//! Flat-key JSON configuration files and sweep specifications.

use std::collections::BTreeSet;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::config::{AdcBits, ScenarioConfig};
use crate::dictionary::DictionaryMode;
use crate::error::{Error, Result};
use crate::estimators::Algorithm;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    Snr,
    PilotBlocks,
    Users,
    AdcBits,
    Subcarriers,
    DiffuseRays,
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::Snr => "snr",
            SweepAxis::PilotBlocks => "pilot_blocks",
            SweepAxis::Users => "users",
            SweepAxis::AdcBits => "adc_bits",
            SweepAxis::Subcarriers => "subcarriers",
            SweepAxis::DiffuseRays => "diffuse_rays",
        }
    }
}

impl fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSpec {
    pub snr_db_list: Vec<f64>,
    pub trials: usize,
    pub algorithms: Vec<Algorithm>,
    pub sweep_axis: SweepAxis,
    /// Points of a non-SNR axis, e.g. `["1", "3", "inf"]` for `adc_bits`.
    pub sweep_values: Vec<String>,
    pub dictionary_mode: DictionaryMode,
    pub output_path: Option<PathBuf>,
}

impl Default for SweepSpec {
    fn default() -> Self {
        SweepSpec {
            snr_db_list: vec![0.0, 5.0, 10.0],
            trials: 50,
            algorithms: vec![Algorithm::Bgsr, Algorithm::Gsmp, Algorithm::Omp],
            sweep_axis: SweepAxis::Snr,
            sweep_values: Vec::new(),
            dictionary_mode: DictionaryMode::OnGrid,
            output_path: None,
        }
    }
}

/// One point of a sweep: its label and the scenario to simulate.
#[derive(Debug, Clone)]
pub struct SweepPoint {
    pub label: String,
    pub cfg: ScenarioConfig,
}

fn parse_count(axis: SweepAxis, v: &str) -> Result<usize> {
    v.trim()
        .parse::<usize>()
        .map_err(|_| Error::config(&["sweep_values"], format!("'{v}' is not a valid {axis} value")))
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::config(&["trials"], "at least one trial is required"));
        }
        if self.algorithms.is_empty() {
            return Err(Error::config(&["algorithms"], "no algorithm selected"));
        }
        if self.snr_db_list.is_empty() || self.snr_db_list.iter().any(|s| !s.is_finite()) {
            return Err(Error::config(&["snr_db_list"], "SNR list must be nonempty and finite"));
        }
        if self.sweep_axis != SweepAxis::Snr {
            if self.sweep_values.is_empty() {
                return Err(Error::config(&["sweep_axis", "sweep_values"], "a non-SNR sweep needs sweep_values"));
            }
            if self.snr_db_list.len() != 1 {
                return Err(Error::config(&["sweep_axis", "snr_db_list"], "a non-SNR sweep runs at exactly one SNR"));
            }
        }
        Ok(())
    }

    /// Scenario for every sweep point; each one is validated.
    pub fn points(&self, base: &ScenarioConfig) -> Result<Vec<SweepPoint>> {
        self.validate()?;
        let points: Vec<SweepPoint> = if self.sweep_axis == SweepAxis::Snr {
            self.snr_db_list
                .iter()
                .map(|&s| SweepPoint { label: format_value(s), cfg: base.clone().with_snr_db(s) })
                .collect()
        } else {
            let at_snr = base.clone().with_snr_db(self.snr_db_list[0]);
            self.sweep_values
                .iter()
                .map(|v| {
                    let mut cfg = at_snr.clone();
                    match self.sweep_axis {
                        SweepAxis::PilotBlocks => cfg.pilot_blocks = parse_count(self.sweep_axis, v)?,
                        SweepAxis::Users => cfg.num_users = parse_count(self.sweep_axis, v)?,
                        SweepAxis::DiffuseRays => cfg.diffuse_rays = parse_count(self.sweep_axis, v)?,
                        SweepAxis::Subcarriers => {
                            cfg.subcarriers = parse_count(self.sweep_axis, v)?;
                            cfg.pilots_per_block = (cfg.subcarriers + 1).saturating_sub(cfg.delay_taps);
                        }
                        SweepAxis::AdcBits => {
                            cfg.adc_bits = AdcBits::from_str(v).map_err(|e| Error::config(&["sweep_values"], e.to_string()))?
                        }
                        SweepAxis::Snr => unreachable!(),
                    }
                    Ok(SweepPoint { label: v.trim().to_string(), cfg })
                })
                .collect::<Result<_>>()?
        };
        for p in &points {
            p.cfg.validate()?;
        }
        Ok(points)
    }
}

pub fn format_value(x: f64) -> String {
    if x.fract() == 0.0 && x.abs() < 1e15 {
        format!("{}", x as i64)
    } else {
        format!("{x}")
    }
}

const SWEEP_KEYS: [&str; 7] =
    ["snr_db_list", "trials", "algorithms", "sweep_axis", "sweep_values", "dictionary_mode", "output_path"];

/// Parsed configuration file.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub preset: String,
    pub scenario: ScenarioConfig,
    pub sweep: SweepSpec,
}

/// Parses flat JSON; an empty document yields the `desk` preset and the
/// default sweep. `preset_override` replaces any `preset` key in the file.
pub fn parse_config(text: &str, preset_override: Option<&str>) -> Result<LoadedConfig> {
    let mut map: Map<String, Value> = if text.trim().is_empty() {
        Map::new()
    } else {
        match serde_json::from_str::<Value>(text) {
            Ok(Value::Object(m)) => m,
            Ok(_) => return Err(Error::config(&["<root>"], "configuration must be a JSON object")),
            Err(e) => return Err(Error::config(&["<root>"], format!("invalid JSON: {e}"))),
        }
    };
    let file_preset = match map.remove("preset") {
        Some(Value::String(s)) => Some(s),
        Some(_) => return Err(Error::config(&["preset"], "preset must be a string")),
        None => None,
    };
    let preset = preset_override.map(str::to_string).or(file_preset).unwrap_or_else(|| "desk".into());
    let base = ScenarioConfig::preset(&preset)?;
    let Value::Object(mut scenario_map) = serde_json::to_value(&base).map_err(|e| Error::input(e.to_string()))? else {
        unreachable!()
    };
    let scenario_keys: BTreeSet<String> = scenario_map.keys().cloned().collect();
    let mut sweep_map = Map::new();
    let mut unknown = Vec::new();
    for (k, v) in map {
        if SWEEP_KEYS.contains(&k.as_str()) {
            sweep_map.insert(k, v);
        } else if scenario_keys.contains(&k) {
            scenario_map.insert(k, v);
        } else {
            unknown.push(k);
        }
    }
    if !unknown.is_empty() {
        let keys: Vec<&str> = unknown.iter().map(String::as_str).collect();
        return Err(Error::config(&keys, "unknown configuration key"));
    }
    let scenario: ScenarioConfig = serde_json::from_value(Value::Object(scenario_map)).map_err(|e| field_error(&e))?;
    let sweep: SweepSpec = serde_json::from_value(Value::Object(sweep_map)).map_err(|e| field_error(&e))?;
    scenario.validate()?;
    sweep.validate()?;
    Ok(LoadedConfig { preset, scenario, sweep })
}

fn field_error(e: &serde_json::Error) -> Error {
    let msg = e.to_string();
    let key = msg.split('`').nth(1).unwrap_or("<value>").to_string();
    Error::config(&[key.as_str()], msg)
}

pub fn load_config(path: &Path, preset_override: Option<&str>) -> Result<LoadedConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::config(&["--config"], format!("cannot read {}: {e}", path.display())))?;
    parse_config(&text, preset_override)
}
