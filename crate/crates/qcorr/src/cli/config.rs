//! Flat `key = value` defaults file.
//!
//! Keys mirror the long flag names; precedence is flags, then config file,
//! then built-in defaults. Unknown keys are rejected so typos cannot
//! silently fall back to defaults.

use std::collections::BTreeMap;
use std::path::Path;

use super::CliError;

const KNOWN_KEYS: [&str; 13] = [
    "n",
    "seed",
    "workers",
    "with-discord",
    "out",
    "bins",
    "r-band",
    "grid",
    "from",
    "to",
    "steps",
    "csv",
    "pure-analytic",
];

pub(crate) struct Config {
    map: BTreeMap<String, String>,
}

impl Config {
    pub fn load(path: Option<&Path>) -> Result<Config, CliError> {
        let mut map = BTreeMap::new();
        let Some(path) = path else { return Ok(Config { map }) };
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(CliError::Usage(format!(
                    "{}:{}: expected `key = value`",
                    path.display(),
                    idx + 1
                )));
            };
            let key = key.trim();
            if !KNOWN_KEYS.contains(&key) {
                return Err(CliError::Usage(format!(
                    "{}:{}: unknown key `{key}`; known keys: {}",
                    path.display(),
                    idx + 1,
                    KNOWN_KEYS.join(", ")
                )));
            }
            map.insert(key.to_string(), value.trim().to_string());
        }
        Ok(Config { map })
    }

    fn parse<T: std::str::FromStr>(&self, key: &str, what: &str) -> Result<Option<T>, CliError> {
        match self.map.get(key) {
            None => Ok(None),
            Some(raw) => raw
                .parse()
                .map(Some)
                .map_err(|_| CliError::Usage(format!("config key `{key}`: `{raw}` is not {what}"))),
        }
    }

    pub fn u64(&self, key: &str) -> Result<Option<u64>, CliError> {
        self.parse(key, "an unsigned integer")
    }

    pub fn usize(&self, key: &str) -> Result<Option<usize>, CliError> {
        self.parse(key, "an unsigned integer")
    }

    pub fn f64(&self, key: &str) -> Result<Option<f64>, CliError> {
        self.parse(key, "a number")
    }

    pub fn bool(&self, key: &str) -> Result<Option<bool>, CliError> {
        self.parse(key, "true or false")
    }

    pub fn string(&self, key: &str) -> Option<String> {
        self.map.get(key).cloned()
    }
}
