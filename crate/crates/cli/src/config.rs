//! Plain `key = value` run configuration. Command-line flags take precedence.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigFile {
    values: BTreeMap<String, String>,
}

impl ConfigFile {
    /// Blank lines and lines starting with `#` are skipped. Keys use the
    /// long flag names (`attenuation-error`, `haar-samples`, ...).
    pub fn parse(text: &str, allowed: &[&str]) -> CliResult<Self> {
        let mut values = BTreeMap::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("line {}: expected key = value", n + 1)))?;
            let key = key.trim().replace('_', "-");
            if !allowed.contains(&key.as_str()) {
                return Err(CliError::Config(format!(
                    "line {}: unknown key `{key}`",
                    n + 1
                )));
            }
            if values
                .insert(key.clone(), value.trim().to_string())
                .is_some()
            {
                return Err(CliError::Config(format!(
                    "line {}: duplicate key `{key}`",
                    n + 1
                )));
            }
        }
        Ok(Self { values })
    }

    pub fn load(path: &Path, allowed: &[&str]) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text, allowed)
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    /// Flag value if given, else the file value, else `default`.
    pub fn resolve<T: FromStr>(&self, key: &str, flag: Option<T>, default: T) -> CliResult<T> {
        if let Some(v) = flag {
            return Ok(v);
        }
        match self.raw(key) {
            Some(text) => text
                .parse()
                .map_err(|_| CliError::Config(format!("cannot parse `{key}` from `{text}`"))),
            None => Ok(default),
        }
    }

    /// Comma-separated list; an empty flag list counts as not given.
    pub fn resolve_list<T: FromStr>(
        &self,
        key: &str,
        flag: Vec<T>,
        default: Vec<T>,
    ) -> CliResult<Vec<T>> {
        if !flag.is_empty() {
            return Ok(flag);
        }
        match self.raw(key) {
            Some(text) => parse_list(text, ',')
                .map_err(|_| CliError::Config(format!("cannot parse `{key}` from `{text}`"))),
            None => Ok(default),
        }
    }
}

pub fn parse_list<T: FromStr>(text: &str, sep: char) -> Result<Vec<T>, T::Err> {
    text.split(sep)
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::parse)
        .collect()
}
