//! TOML config ingestion, the canonical emitter, and key=value overrides.
//!
//! The file schema is exactly `kappa` plus an `atoms` array with fields `g`,
//! `gamma`, `delta`, `excited`; `gamma` and `delta` default to zero and
//! `excited` to false. On load all rates are normalized into units of kappa.
//! The emitter writes every field in a fixed order with 17 significant
//! digits, so `load(emit(cfg)) == cfg` bit for bit.

use std::path::Path;

use purcell_core::{AtomSpec, ParamPath, SystemConfig};
use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    kappa: f64,
    atoms: Vec<RawAtom>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAtom {
    g: f64,
    #[serde(default)]
    gamma: f64,
    #[serde(default)]
    delta: f64,
    #[serde(default)]
    excited: bool,
}

/// Parses config text, normalizes units, and validates.
pub fn parse_config(text: &str) -> Result<SystemConfig, CliError> {
    let raw: RawConfig = toml::from_str(text)
        .map_err(|e| CliError::Validation(format!("config parse error: {e}")))?;
    let cfg = SystemConfig::new(
        raw.kappa,
        raw.atoms
            .into_iter()
            .map(|a| AtomSpec {
                g: a.g,
                gamma: a.gamma,
                delta: a.delta,
                excited: a.excited,
            })
            .collect(),
    );
    if cfg.kappa.is_nan() || cfg.kappa <= 0.0 {
        // normalize_units needs a positive kappa; surface the validation
        // error with the field name instead of dividing by it
        return Err(CliError::Validation(format!(
            "config invalid: kappa must be positive, got {}",
            cfg.kappa
        )));
    }
    let cfg = cfg.normalize_units();
    cfg.validate()
        .map_err(|e| CliError::Validation(format!("config invalid: {e}")))?;
    Ok(cfg)
}

/// Loads and validates a config file, applying unit normalization.
pub fn load_config(path: &Path) -> Result<SystemConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Validation(format!("cannot read config {}: {e}", path.display())))?;
    parse_config(&text)
}

/// Canonical emitter: fixed field order, 17 significant digits.
pub fn emit_config(cfg: &SystemConfig) -> String {
    let mut out = String::new();
    out.push_str(&format!("kappa = {:.16e}\n", cfg.kappa));
    for atom in &cfg.atoms {
        out.push_str("\n[[atoms]]\n");
        out.push_str(&format!("g = {:.16e}\n", atom.g));
        out.push_str(&format!("gamma = {:.16e}\n", atom.gamma));
        out.push_str(&format!("delta = {:.16e}\n", atom.delta));
        out.push_str(&format!("excited = {}\n", atom.excited));
    }
    out
}

/// Applies `path=value` overrides (numeric fields or `atoms[i].excited`),
/// then re-validates.
pub fn apply_overrides(cfg: SystemConfig, overrides: &[String]) -> Result<SystemConfig, CliError> {
    let mut cfg = cfg;
    for entry in overrides {
        let (path, value) = entry
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("override `{entry}` is not PATH=VALUE")))?;
        let path = path.trim();
        if let Some(idx_field) = path
            .strip_prefix("atoms[")
            .and_then(|r| r.strip_suffix("].excited"))
        {
            let index: usize = idx_field
                .parse()
                .map_err(|_| CliError::Usage(format!("bad atom index in `{entry}`")))?;
            let flag: bool = value
                .trim()
                .parse()
                .map_err(|_| CliError::Usage(format!("`{entry}`: expected true or false")))?;
            if index >= cfg.atoms.len() {
                return Err(CliError::Usage(format!(
                    "override `{entry}`: atom index {index} out of range"
                )));
            }
            cfg.atoms[index].excited = flag;
            continue;
        }
        let param = ParamPath::parse(path)
            .map_err(|e| CliError::Usage(format!("override `{entry}`: {e}")))?;
        let num: f64 = value
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("`{entry}`: expected a number")))?;
        cfg = param
            .set(&cfg, num)
            .map_err(|e| CliError::Usage(format!("override `{entry}`: {e}")))?;
    }
    cfg.validate()
        .map_err(|e| CliError::Validation(format!("config invalid after overrides: {e}")))?;
    Ok(cfg)
}
