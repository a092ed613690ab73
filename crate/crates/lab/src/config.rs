//! Flat `key = value` configuration with command-line overrides.
//!
//! Every command resolves its settings against a table of defaults; keys
//! outside that table are rejected. The hash covers the resolved map, so
//! two invocations that differ only in spelled-out defaults hash the same.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use sha2::{Digest, Sha256};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`, got `{text}`")]
    Syntax { line: usize, text: String },
    #[error("override `{0}` is not of the form key=value")]
    BadOverride(String),
    #[error("unknown key `{0}`")]
    UnknownKey(String),
    #[error("key `{key}`: cannot parse `{value}` as {kind}")]
    BadValue { key: String, value: String, kind: &'static str },
    #[error("{0}")]
    Invalid(String),
    #[error("cannot read config {path}: {reason}")]
    Read { path: String, reason: String },
}

/// Raw key-value pairs in the order they were given; later entries win.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RawConfig {
    entries: Vec<(String, String)>,
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut entries = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| ConfigError::Syntax { line: i + 1, text: line.to_string() })?;
            let k = k.trim();
            if k.is_empty() {
                return Err(ConfigError::Syntax { line: i + 1, text: line.to_string() });
            }
            entries.push((k.to_string(), v.trim().to_string()));
        }
        Ok(Self { entries })
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Read { path: path.display().to_string(), reason: e.to_string() })?;
        Self::parse(&text)
    }

    /// Applies one `key=value` override.
    pub fn set(&mut self, assignment: &str) -> Result<(), ConfigError> {
        let (k, v) = assignment.split_once('=').ok_or_else(|| ConfigError::BadOverride(assignment.to_string()))?;
        let k = k.trim();
        if k.is_empty() {
            return Err(ConfigError::BadOverride(assignment.to_string()));
        }
        self.insert(k, v.trim());
        Ok(())
    }

    pub fn insert(&mut self, key: &str, value: &str) {
        self.entries.push((key.to_string(), value.to_string()));
    }

    /// Fills in `defaults` and rejects keys not listed there.
    pub fn resolve(&self, defaults: &[(&str, &str)]) -> Result<Config, ConfigError> {
        let mut values: BTreeMap<String, String> = defaults.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect();
        for (k, v) in &self.entries {
            match values.get_mut(k) {
                Some(slot) => *slot = v.clone(),
                None => return Err(ConfigError::UnknownKey(k.clone())),
            }
        }
        Ok(Config { values })
    }
}

/// Resolved configuration: every key has a value.
#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    values: BTreeMap<String, String>,
}

impl Config {
    pub fn str(&self, key: &str) -> &str {
        self.values.get(key).map(String::as_str).unwrap_or_else(|| panic!("key `{key}` missing from defaults"))
    }

    fn parsed<T: std::str::FromStr>(&self, key: &str, kind: &'static str) -> Result<T, ConfigError> {
        let v = self.str(key);
        v.parse().map_err(|_| ConfigError::BadValue { key: key.to_string(), value: v.to_string(), kind })
    }

    pub fn f64(&self, key: &str) -> Result<f64, ConfigError> {
        let x: f64 = self.parsed(key, "a real number")?;
        if !x.is_finite() {
            return Err(ConfigError::BadValue { key: key.to_string(), value: self.str(key).to_string(), kind: "a finite real" });
        }
        Ok(x)
    }

    pub fn usize(&self, key: &str) -> Result<usize, ConfigError> {
        self.parsed(key, "a nonnegative integer")
    }

    pub fn u64(&self, key: &str) -> Result<u64, ConfigError> {
        self.parsed(key, "a nonnegative integer")
    }

    pub fn bool(&self, key: &str) -> Result<bool, ConfigError> {
        self.parsed(key, "true or false")
    }

    /// Comma-separated reals.
    pub fn f64_list(&self, key: &str) -> Result<Vec<f64>, ConfigError> {
        let v = self.str(key);
        v.split(',')
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .ok()
                    .filter(|x| x.is_finite())
                    .ok_or_else(|| ConfigError::BadValue { key: key.to_string(), value: v.to_string(), kind: "a comma-separated list of reals" })
            })
            .collect()
    }

    /// `key=value` lines in key order.
    pub fn canonical(&self) -> String {
        let mut s = String::new();
        for (k, v) in &self.values {
            let _ = writeln!(s, "{k}={v}");
        }
        s
    }

    /// SHA-256 of [`Config::canonical`], lowercase hex.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.canonical().as_bytes());
        digest.iter().fold(String::with_capacity(64), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
    }
}
