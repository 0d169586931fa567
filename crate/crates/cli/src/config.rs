//! Run configuration: `key=value` lines from an optional file, overridden by
//! command-line flags (`--t-n 1.5` sets key `t_n`).

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::CliError;

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Config {
    values: BTreeMap<String, String>,
}

impl Config {
    /// Parses `key=value` lines. Blank lines and lines starting with `#` are
    /// skipped; keys not in `allowed` are rejected.
    pub fn parse(text: &str, allowed: &[String], origin: &Path) -> Result<Config, CliError> {
        let mut values = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::Usage(format!("{}:{}: expected key=value, got {line:?}", origin.display(), i + 1))
            })?;
            let key = key.trim().replace('-', "_");
            if !allowed.contains(&key) {
                return Err(CliError::Usage(format!("{}:{}: unknown key `{key}`", origin.display(), i + 1)));
            }
            values.insert(key, value.trim().to_string());
        }
        Ok(Config { values })
    }

    pub fn load(path: &Path, allowed: &[String]) -> Result<Config, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        Config::parse(&text, allowed, path)
    }

    /// Flags win over file values.
    pub fn overlay(mut self, flags: BTreeMap<String, String>) -> Config {
        self.values.extend(flags);
        self
    }

    /// The run parameters without `out_dir`, so that outputs do not depend on
    /// where they are written.
    pub fn echo(&self) -> Config {
        let mut values = self.values.clone();
        values.remove("out_dir");
        Config { values }
    }

    pub fn entries(&self) -> &BTreeMap<String, String> {
        &self.values
    }

    /// The configuration as `key=value` lines, sorted by key.
    pub fn to_text(&self) -> String {
        self.values.iter().map(|(k, v)| format!("{k}={v}\n")).collect()
    }

    pub fn has(&self, key: &str) -> bool {
        self.values.contains_key(key)
    }

    pub fn str(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn require_str(&self, key: &str) -> Result<&str, CliError> {
        self.str(key).ok_or_else(|| CliError::Usage(format!("missing required key `{key}`")))
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>, CliError>
    where
        T::Err: Display,
    {
        match self.values.get(key) {
            None => Ok(None),
            Some(v) => v
                .parse::<T>()
                .map(Some)
                .map_err(|e| CliError::Usage(format!("bad value for `{key}`: {v:?} ({e})"))),
        }
    }

    pub fn get_or<T: FromStr>(&self, key: &str, default: T) -> Result<T, CliError>
    where
        T::Err: Display,
    {
        Ok(self.get(key)?.unwrap_or(default))
    }

    pub fn require<T: FromStr>(&self, key: &str) -> Result<T, CliError>
    where
        T::Err: Display,
    {
        self.get(key)?
            .ok_or_else(|| CliError::Usage(format!("missing required key `{key}`")))
    }

    pub fn path(&self, key: &str) -> Option<PathBuf> {
        self.str(key).map(PathBuf::from)
    }

    /// Comma-separated list of reals.
    pub fn floats(&self, key: &str) -> Result<Option<Vec<f64>>, CliError> {
        match self.str(key) {
            None => Ok(None),
            Some(v) => v
                .split(',')
                .map(|s| {
                    s.trim()
                        .parse::<f64>()
                        .map_err(|e| CliError::Usage(format!("bad value in `{key}`: {s:?} ({e})")))
                })
                .collect::<Result<Vec<_>, _>>()
                .map(Some),
        }
    }

    pub fn bool_or(&self, key: &str, default: bool) -> Result<bool, CliError> {
        match self.str(key) {
            None => Ok(default),
            Some("true" | "yes" | "1") => Ok(true),
            Some("false" | "no" | "0") => Ok(false),
            Some(other) => Err(CliError::Usage(format!("bad value for `{key}`: {other:?} (expected true/false)"))),
        }
    }
}
