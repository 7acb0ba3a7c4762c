//! Run configuration: defaults, a flat key=value file, and flags layered in
//! that order.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use furthlab_core::{PhaseConvention, PhysicsConstants};

use crate::error::{CliError, CliResult};

pub const COMMON_KEYS: [&str; 6] = ["seed", "out", "profile", "hbar", "mass", "phase_convention"];
pub const DEFAULT_SEED: u64 = 20240601;
pub const DEFAULT_OUT: &str = "furthlab-out";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Profile {
    Quick,
    Full,
}

impl Profile {
    pub fn name(self) -> &'static str {
        match self {
            Profile::Quick => "quick",
            Profile::Full => "full",
        }
    }
}

fn normalize_key(key: &str) -> String {
    key.trim().replace('-', "_")
}

/// Parses `key = value` lines. Blank lines and lines starting with `#` are
/// skipped; keys may use `-` or `_`.
pub fn parse_config_text(text: &str) -> CliResult<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("line {}: expected key=value, got {line:?}", no + 1)))?;
        let key = normalize_key(k);
        if key.is_empty() {
            return Err(CliError::Config(format!("line {}: empty key", no + 1)));
        }
        if map.insert(key.clone(), v.trim().to_string()).is_some() {
            return Err(CliError::Config(format!("line {}: duplicate key {key}", no + 1)));
        }
    }
    Ok(map)
}

pub fn read_config_file(path: &Path) -> CliResult<BTreeMap<String, String>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    parse_config_text(&text)
}

/// A fully resolved run: every key has a value.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub verb: String,
    values: BTreeMap<String, String>,
}

impl RunConfig {
    /// `verb_defaults` lists (key, quick default, full default).
    pub fn resolve(
        verb: &str,
        verb_defaults: &[(&str, &str, &str)],
        file: &BTreeMap<String, String>,
        flags: &[(&str, String)],
    ) -> CliResult<Self> {
        let known = |k: &str| COMMON_KEYS.contains(&k) || verb_defaults.iter().any(|(d, _, _)| *d == k);
        if let Some(k) = file.keys().find(|k| !known(k)) {
            return Err(CliError::Config(format!("unknown key {k:?} for {verb}")));
        }
        let flag = |k: &str| flags.iter().rev().find(|(f, _)| *f == k).map(|(_, v)| v.clone());
        let profile_text = flag("profile").or_else(|| file.get("profile").cloned()).unwrap_or_else(|| "quick".into());
        let profile = match profile_text.as_str() {
            "quick" => Profile::Quick,
            "full" => Profile::Full,
            other => return Err(CliError::Config(format!("profile must be quick or full, got {other:?}"))),
        };
        let mut values = BTreeMap::new();
        values.insert("seed".into(), DEFAULT_SEED.to_string());
        values.insert("out".into(), DEFAULT_OUT.into());
        values.insert("hbar".into(), "1".into());
        values.insert("mass".into(), "1".into());
        values.insert("phase_convention".into(), "plus".into());
        for (k, quick, full) in verb_defaults {
            values.insert(k.to_string(), if profile == Profile::Quick { quick } else { full }.to_string());
        }
        values.extend(file.iter().map(|(k, v)| (k.clone(), v.clone())));
        for (k, v) in flags {
            values.insert(k.to_string(), v.clone());
        }
        values.insert("profile".into(), profile.name().into());
        let cfg = Self { verb: verb.to_string(), values };
        cfg.constants()?;
        cfg.get::<u64>("seed")?;
        Ok(cfg)
    }

    pub fn raw(&self, key: &str) -> CliResult<&str> {
        self.values.get(key).map(String::as_str).ok_or_else(|| CliError::Config(format!("missing key {key}")))
    }

    pub fn get<T: FromStr>(&self, key: &str) -> CliResult<T> {
        let raw = self.raw(key)?;
        raw.parse().map_err(|_| CliError::Config(format!("{key}: cannot parse {raw:?}")))
    }

    pub fn positive(&self, key: &str) -> CliResult<f64> {
        let v: f64 = self.get(key)?;
        if v > 0.0 && v.is_finite() {
            Ok(v)
        } else {
            Err(CliError::Config(format!("{key} must be a positive number, got {v}")))
        }
    }

    pub fn count(&self, key: &str, min: usize) -> CliResult<usize> {
        let v: usize = self.get(key)?;
        if v < min {
            return Err(CliError::Config(format!("{key} must be at least {min}, got {v}")));
        }
        Ok(v)
    }

    pub fn seed(&self) -> u64 {
        self.get("seed").unwrap_or(DEFAULT_SEED)
    }

    pub fn profile(&self) -> Profile {
        if self.values.get("profile").map(String::as_str) == Some("full") {
            Profile::Full
        } else {
            Profile::Quick
        }
    }

    pub fn out_dir(&self) -> PathBuf {
        PathBuf::from(self.values.get("out").map(String::as_str).unwrap_or(DEFAULT_OUT))
    }

    pub fn constants(&self) -> CliResult<PhysicsConstants> {
        let phase = PhaseConvention::from_str(self.raw("phase_convention")?)
            .map_err(|_| CliError::Config("phase_convention must be plus or minus".into()))?;
        Ok(PhysicsConstants::new(self.positive("hbar")?, self.positive("mass")?)
            .map_err(|e| CliError::Config(e.to_string()))?
            .with_phase(phase))
    }

    /// Everything that determines the run's output, i.e. all keys but `out`.
    pub fn echo(&self) -> BTreeMap<String, String> {
        self.values.iter().filter(|(k, _)| k.as_str() != "out").map(|(k, v)| (k.clone(), v.clone())).collect()
    }
}
