//! Flat `key = value` run configuration with flag overrides.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use crate::CliError;

/// Resolved parameters: flags win over file values, file values over
/// defaults. Every key a command reads is remembered so the output header
/// can echo the exact configuration that produced it.
#[derive(Debug, Clone, Default)]
pub struct RunConfig {
    file: BTreeMap<String, String>,
    flags: BTreeMap<String, String>,
    used: BTreeMap<String, String>,
}

fn normalize_key(key: &str) -> String {
    key.trim().replace('_', "-")
}

/// Parses `key = value` lines; blank lines and `#` comments are skipped.
pub fn parse_config_text(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut out = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(CliError::Usage(format!(
                "config line {}: expected `key = value`, got `{raw}`",
                lineno + 1
            )));
        };
        let key = normalize_key(key);
        if key.is_empty() {
            return Err(CliError::Usage(format!(
                "config line {}: empty key",
                lineno + 1
            )));
        }
        out.insert(key, value.trim().to_string());
    }
    Ok(out)
}

impl RunConfig {
    pub fn new(file: BTreeMap<String, String>) -> Self {
        Self {
            file,
            ..Self::default()
        }
    }

    pub fn from_path(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        Ok(Self::new(parse_config_text(&text)?))
    }

    /// Registers a flag value; `None` leaves the file value in force.
    pub fn flag(&mut self, key: &str, value: Option<impl ToString>) {
        if let Some(v) = value {
            self.flags.insert(normalize_key(key), v.to_string());
        }
    }

    fn lookup(&self, key: &str) -> Option<&String> {
        self.flags.get(key).or_else(|| self.file.get(key))
    }

    /// Raw value without recording it in the echo.
    pub fn peek(&self, key: &str) -> Option<&str> {
        self.lookup(key).map(String::as_str)
    }

    pub fn get_str(&mut self, key: &str) -> Option<String> {
        let value = self.lookup(key).cloned()?;
        self.used.insert(key.to_string(), value.clone());
        Some(value)
    }

    pub fn get<T: FromStr>(&mut self, key: &str) -> Result<Option<T>, CliError> {
        match self.get_str(key) {
            None => Ok(None),
            Some(raw) => raw
                .parse()
                .map(Some)
                .map_err(|_| CliError::Usage(format!("invalid value `{raw}` for {key}"))),
        }
    }

    pub fn get_or<T: FromStr + ToString>(&mut self, key: &str, default: T) -> Result<T, CliError> {
        match self.get(key)? {
            Some(v) => Ok(v),
            None => {
                self.used.insert(key.to_string(), default.to_string());
                Ok(default)
            }
        }
    }

    pub fn require<T: FromStr>(&mut self, key: &str) -> Result<T, CliError> {
        self.get(key)?
            .ok_or_else(|| CliError::Usage(format!("missing required parameter --{key}")))
    }

    /// Records a derived value (e.g. a computed default) in the echo.
    pub fn note(&mut self, key: &str, value: impl ToString) {
        self.used.insert(key.to_string(), value.to_string());
    }

    /// Every parameter the command consumed, sorted by key.
    pub fn resolved(&self) -> &BTreeMap<String, String> {
        &self.used
    }
}
