//! `key = value` defaults file. Keys use the long flag names, with either
//! dashes or underscores. Command-line flags override file values.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use crate::CliError;

pub const CONFIG_ENV: &str = "LTSPID_CONFIG";

const KNOWN_KEYS: &[&str] = &[
    "duration",
    "anchor",
    "offset",
    "fft_size",
    "hop",
    "include_dc",
    "power_floor",
    "r_same",
    "r_diff",
    "angry_threshold",
    "pairing",
    "round",
    "bit_depth",
];

#[derive(Debug, Default, Clone)]
pub struct FileConfig {
    values: BTreeMap<String, String>,
    source: String,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn parse(text: &str, source: &str) -> Result<Self, CliError> {
        let mut values = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                CliError::Usage(format!("{source}:{}: expected key = value", i + 1))
            })?;
            let key = k.trim().replace('-', "_");
            if !KNOWN_KEYS.contains(&key.as_str()) {
                return Err(CliError::Usage(format!(
                    "{source}:{}: unknown key {key:?}",
                    i + 1
                )));
            }
            values.insert(key, v.trim().to_string());
        }
        Ok(Self {
            values,
            source: source.to_string(),
        })
    }

    /// Flag value, else file value, else `default`.
    pub fn pick<T: FromStr>(&self, flag: Option<T>, key: &str, default: T) -> Result<T, CliError>
    where
        T::Err: std::fmt::Display,
    {
        if let Some(v) = flag {
            return Ok(v);
        }
        match self.values.get(key) {
            Some(raw) => raw
                .parse()
                .map_err(|e| CliError::Usage(format!("{}: {key} = {raw:?}: {e}", self.source))),
            None => Ok(default),
        }
    }

    pub fn pick_opt<T: FromStr>(&self, flag: Option<T>, key: &str) -> Result<Option<T>, CliError>
    where
        T::Err: std::fmt::Display,
    {
        if flag.is_some() {
            return Ok(flag);
        }
        self.values
            .get(key)
            .map(|raw| {
                raw.parse()
                    .map_err(|e| CliError::Usage(format!("{}: {key} = {raw:?}: {e}", self.source)))
            })
            .transpose()
    }
}
