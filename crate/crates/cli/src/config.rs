//! Run settings merged from defaults, a key=value file and command-line flags.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use tqrm::meanfield;
use tqrm::{FockTruncation, ModelParams};

use crate::CliError;

/// Keys accepted in a config file. Flags use the same names with `_` as `-`.
pub const KNOWN_KEYS: &[&str] = &[
    "omega", "Omega", "eps", "g", "gscan", "n_max", "n_cap", "emin", "emax", "estep", "out", "plot", "threads", "si",
    "seed", "sector", "levels", "observable", "xmin", "xmax", "pmin", "pmax", "nx", "np", "reference", "alpha",
    "mass", "charge", "nu", "omega_drive", "vd_slope", "convention", "detuning", "draws",
];

#[derive(Debug, Clone, Default)]
pub struct Settings {
    values: BTreeMap<String, String>,
}

impl Settings {
    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config file {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut values = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("config line {}: expected key=value, got {raw:?}", i + 1)))?;
            let key = key.trim();
            if !KNOWN_KEYS.contains(&key) {
                return Err(CliError::Config(format!("config line {}: unknown key {key:?}", i + 1)));
            }
            values.insert(key.to_string(), value.trim().to_string());
        }
        Ok(Self { values })
    }

    /// Overrides `key` when the flag was given.
    pub fn set<T: Display>(&mut self, key: &str, value: Option<T>) {
        if let Some(v) = value {
            self.values.insert(key.to_string(), v.to_string());
        }
    }

    pub fn set_flag(&mut self, key: &str, on: bool) {
        if on {
            self.values.insert(key.to_string(), "true".into());
        }
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn parsed<T: FromStr>(&self, key: &str, default: T) -> Result<T, CliError>
    where
        T::Err: Display,
    {
        match self.get(key) {
            None => Ok(default),
            Some(v) => v.parse().map_err(|e| CliError::Config(format!("invalid value {v:?} for {key}: {e}"))),
        }
    }

    pub fn optional<T: FromStr>(&self, key: &str) -> Result<Option<T>, CliError>
    where
        T::Err: Display,
    {
        self.get(key)
            .map(|v| v.parse().map_err(|e| CliError::Config(format!("invalid value {v:?} for {key}: {e}"))))
            .transpose()
    }

    pub fn flag(&self, key: &str) -> Result<bool, CliError> {
        match self.get(key) {
            None => Ok(false),
            Some("true" | "1" | "yes") => Ok(true),
            Some("false" | "0" | "no") => Ok(false),
            Some(v) => Err(CliError::Config(format!("invalid boolean {v:?} for {key}"))),
        }
    }

    pub fn as_map(&self) -> &BTreeMap<String, String> {
        &self.values
    }

    pub fn model_params(&self) -> Result<ModelParams, CliError> {
        ModelParams::new(
            self.parsed("omega", 1.0)?,
            self.parsed("Omega", 1.0)?,
            self.parsed("eps", 0.0)?,
            self.parsed("g", 0.5)?,
        )
        .map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn truncation(&self) -> Result<FockTruncation, CliError> {
        let t = FockTruncation::new(self.parsed("n_max", FockTruncation::DEFAULT_N_MAX)?)
            .map_err(|e| CliError::Config(e.to_string()))?;
        Ok(t.with_cap(self.parsed("n_cap", FockTruncation::DEFAULT_CAP)?))
    }

    /// The `gscan` grid, or the single coupling `g` when no scan was requested.
    pub fn couplings(&self) -> Result<Vec<f64>, CliError> {
        match self.get("gscan") {
            Some(spec) => parse_gscan(spec),
            None => Ok(vec![self.model_params()?.g]),
        }
    }
}

/// `start:stop:step`, inclusive of `stop` when it lies on the grid.
pub fn parse_gscan(spec: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = spec.split(':').collect();
    let [a, b, step] = parts[..] else {
        return Err(CliError::Config(format!("gscan must be start:stop:step, got {spec:?}")));
    };
    let num = |s: &str| {
        s.trim().parse::<f64>().map_err(|e| CliError::Config(format!("invalid gscan field {s:?}: {e}")))
    };
    meanfield::uniform_grid(num(a)?, num(b)?, num(step)?).map_err(|e| CliError::Config(format!("gscan: {e}")))
}
