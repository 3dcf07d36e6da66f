//! Flat key-value config file and flag/config/default merging.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use tradefreq::Error;

/// Every key the config file may carry; each matches a long flag name.
pub const KNOWN_KEYS: &[&str] = &[
    "output",
    "format",
    "hurst",
    "n",
    "seed",
    "sigma",
    "drift",
    "horizon",
    "method",
    "roughness",
    "micro",
    "spread",
    "kappa",
    "laziness-mode",
    "laziness-base",
    "laziness-scale",
    "laziness-exponent",
    "level-cap",
    "input",
    "date-column",
    "price-column",
    "log-transform",
    "spacing",
    "time-axis",
    "levels",
    "hurst-values",
    "m-lo",
    "m-hi",
    "n-paths",
];

pub const OUTPUT_DIR_ENV: &str = "TRADEFREQ_OUTPUT_DIR";

/// Parsed config document. Keys not used by the running subcommand are
/// ignored; keys outside [`KNOWN_KEYS`] are rejected.
#[derive(Default)]
pub struct Config {
    values: BTreeMap<String, toml::Value>,
}

fn usage(name: &'static str, reason: String) -> Error {
    Error::InvalidParameter { name, reason }
}

impl Config {
    pub fn load(path: &Path) -> Result<Self, Error> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text, path)
    }

    pub fn parse(text: &str, path: &Path) -> Result<Self, Error> {
        let table: toml::Table = text.parse().map_err(|e: toml::de::Error| {
            let line = e
                .span()
                .map_or(0, |s| text[..s.start].lines().count().max(1) as u64);
            Error::Parse {
                path: path.to_path_buf(),
                line,
                reason: e.message().to_string(),
            }
        })?;
        let mut values = BTreeMap::new();
        for (k, v) in table {
            if !KNOWN_KEYS.contains(&k.as_str()) {
                return Err(usage(
                    "config",
                    format!("{}: unknown key `{k}`", path.display()),
                ));
            }
            if v.is_table() {
                return Err(usage(
                    "config",
                    format!("{}: key `{k}` must be a scalar", path.display()),
                ));
            }
            values.insert(k, v);
        }
        Ok(Config { values })
    }

    fn raw(&self, key: &'static str) -> Option<&toml::Value> {
        debug_assert!(KNOWN_KEYS.contains(&key), "{key}");
        self.values.get(key)
    }

    pub fn f64(&self, key: &'static str) -> Result<Option<f64>, Error> {
        match self.raw(key) {
            None => Ok(None),
            Some(toml::Value::Float(v)) => Ok(Some(*v)),
            Some(toml::Value::Integer(v)) => Ok(Some(*v as f64)),
            Some(other) => Err(usage(key, format!("config value {other} is not a number"))),
        }
    }

    pub fn u64(&self, key: &'static str) -> Result<Option<u64>, Error> {
        match self.raw(key) {
            None => Ok(None),
            Some(toml::Value::Integer(v)) if *v >= 0 => Ok(Some(*v as u64)),
            Some(other) => Err(usage(
                key,
                format!("config value {other} is not a non-negative integer"),
            )),
        }
    }

    pub fn string(&self, key: &'static str) -> Result<Option<String>, Error> {
        match self.raw(key) {
            None => Ok(None),
            Some(toml::Value::String(v)) => Ok(Some(v.clone())),
            Some(other) => Err(usage(key, format!("config value {other} is not a string"))),
        }
    }

    pub fn bool(&self, key: &'static str) -> Result<Option<bool>, Error> {
        match self.raw(key) {
            None => Ok(None),
            Some(toml::Value::Boolean(v)) => Ok(Some(*v)),
            Some(other) => Err(usage(key, format!("config value {other} is not a boolean"))),
        }
    }

    pub fn f64_list(&self, key: &'static str) -> Result<Option<Vec<f64>>, Error> {
        match self.raw(key) {
            None => Ok(None),
            Some(toml::Value::Array(items)) => items
                .iter()
                .map(|v| match v {
                    toml::Value::Float(x) => Ok(*x),
                    toml::Value::Integer(x) => Ok(*x as f64),
                    other => Err(usage(key, format!("config entry {other} is not a number"))),
                })
                .collect::<Result<Vec<_>, _>>()
                .map(Some),
            Some(toml::Value::String(s)) => parse_f64_list(s).map(Some).map_err(|r| usage(key, r)),
            Some(other) => Err(usage(
                key,
                format!("config value {other} is not a list of numbers"),
            )),
        }
    }
}

pub fn parse_f64_list(s: &str) -> Result<Vec<f64>, String> {
    s.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| format!("`{t}`: {e}")))
        .collect()
}

pub fn required<T>(v: Option<T>, key: &'static str) -> Result<T, Error> {
    v.ok_or_else(|| {
        usage(
            key,
            "required: pass the flag or set it in the config file".into(),
        )
    })
}

pub fn to_u32(v: u64, key: &'static str) -> Result<u32, Error> {
    u32::try_from(v).map_err(|_| usage(key, format!("{v} does not fit in 32 bits")))
}

pub fn to_usize(v: u64, key: &'static str) -> Result<usize, Error> {
    usize::try_from(v).map_err(|_| usage(key, format!("{v} does not fit in usize")))
}

/// Output target after applying the output-directory override: relative
/// paths resolve against it, and without an explicit path a per-subcommand
/// default file is written there. `None` means stdout.
pub fn resolve_output(
    explicit: Option<PathBuf>,
    default_name: &str,
    env_dir: Option<PathBuf>,
) -> Option<PathBuf> {
    match (explicit, env_dir) {
        (Some(p), Some(dir)) if p.is_relative() => Some(dir.join(p)),
        (Some(p), _) => Some(p),
        (None, Some(dir)) => Some(dir.join(default_name)),
        (None, None) => None,
    }
}
