//! Flat key=value scenario file format.
//!
//! Example:
//!
//! ```text
//! # custom scenario
//! name = custom
//! m = 16
//! spacing_over_wavelength = 0.5
//! desired_doa_deg = 90
//! snr_db = 10
//! inr_db = 30
//! noise_power = 1.0
//! n_interferers = 9
//! # optional, fixes interferer placement instead of per-trial draws:
//! # interferer_doas = 20.5, 48.0, 130.2, ...
//! n_snapshots = 3000
//! alpha = 21
//! beta = 0.9
//! eta = 0.5
//! gamma = 1.0
//! rls_forgetting = 0.998
//! # frost_mu = 1e-7
//! runs = 100
//! # repeatable; "<snapshot_index> +<interferers_added>":
//! # change_event = 3000 +4
//! ```
//!
//! Lines starting with `#` and blank lines are ignored; unknown keys are
//! errors. Defaults (when a key is omitted) match the stationary preset's
//! geometry and tuning values.

use std::path::Path;

use crate::harness::ExperimentSpec;
use crate::{Error, Result};

fn parse_num<T: std::str::FromStr>(key: &str, val: &str) -> Result<T> {
    val.trim()
        .parse()
        .map_err(|_| Error::Config(format!("could not parse value '{val}' for key '{key}'")))
}

/// Parses scenario text into an [`ExperimentSpec`] and validates it.
pub fn parse_spec(text: &str) -> Result<ExperimentSpec> {
    let mut spec = ExperimentSpec {
        name: "custom".into(),
        change_events: vec![],
        ..ExperimentSpec::exp1()
    };
    for (lineno, raw) in text.lines().enumerate() {
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let (key, val) = line.split_once('=').ok_or_else(|| {
            Error::Config(format!("line {}: expected 'key = value', got '{line}'", lineno + 1))
        })?;
        let (key, val) = (key.trim(), val.trim());
        match key {
            "name" => spec.name = val.to_string(),
            "m" => spec.m = parse_num(key, val)?,
            "spacing_over_wavelength" => spec.spacing_over_wavelength = parse_num(key, val)?,
            "desired_doa_deg" => spec.desired_doa_deg = parse_num(key, val)?,
            "snr_db" => spec.snr_db = parse_num(key, val)?,
            "inr_db" => spec.inr_db = parse_num(key, val)?,
            "noise_power" => spec.noise_power = parse_num(key, val)?,
            "n_interferers" => spec.n_interferers = parse_num(key, val)?,
            "interferer_doas" => {
                let doas: Result<Vec<f64>> =
                    val.split(',').map(|v| parse_num(key, v)).collect();
                spec.interferer_doas = Some(doas?);
            }
            "n_snapshots" => spec.n_snapshots = parse_num(key, val)?,
            "alpha" => spec.alpha = parse_num(key, val)?,
            "beta" => spec.beta = parse_num(key, val)?,
            "eta" => spec.eta = parse_num(key, val)?,
            "gamma" => spec.gamma = parse_num(key, val)?,
            "frost_mu" => spec.frost_mu = Some(parse_num(key, val)?),
            "rls_forgetting" => spec.rls_forgetting = parse_num(key, val)?,
            "runs" => spec.runs_default = parse_num(key, val)?,
            "change_event" => {
                let (at, added) = val.split_once('+').ok_or_else(|| {
                    Error::Config(format!(
                        "line {}: change_event must look like '<snapshot> +<count>', got '{val}'",
                        lineno + 1
                    ))
                })?;
                spec.change_events.push((parse_num(key, at)?, parse_num(key, added)?));
            }
            other => {
                return Err(Error::Config(format!("line {}: unknown key '{other}'", lineno + 1)))
            }
        }
    }
    spec.validate()?;
    Ok(spec)
}

/// Reads and parses a scenario file.
pub fn load_spec(path: &Path) -> Result<ExperimentSpec> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read config '{}': {e}", path.display())))?;
    parse_spec(&text)
}
