//! Settings merged from command-line flags and a flat `key = value` file.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use sha2::{Digest, Sha256};

#[derive(Debug)]
pub struct ConfigError {
    pub key: String,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid `{}`: {}", self.key, self.message)
    }
}

pub fn config_error(key: &str, message: impl Into<String>) -> ConfigError {
    ConfigError {
        key: key.to_string(),
        message: message.into(),
    }
}

/// `t-min` and `t_min` name the same key.
pub fn normalize_key(key: &str) -> String {
    key.trim().replace('-', "_")
}

/// Parses the flat config format: one `key = value` per line, `#` comments.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>, ConfigError> {
    let mut out = BTreeMap::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(config_error(
                &format!("line {}", n + 1),
                format!("expected `key = value`, got {line:?}"),
            ));
        };
        let key = normalize_key(k);
        if key.is_empty() {
            return Err(config_error(&format!("line {}", n + 1), "empty key"));
        }
        if out.insert(key.clone(), v.trim().to_string()).is_some() {
            return Err(config_error(&key, format!("given twice (line {})", n + 1)));
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, Default)]
pub struct Settings {
    values: BTreeMap<String, String>,
    pub warnings: Vec<String>,
}

impl Settings {
    /// Flags first, then the file; the file wins on conflict.
    pub fn merge(
        flags: BTreeMap<String, String>,
        file: BTreeMap<String, String>,
        allowed: &[&str],
    ) -> Result<Self, ConfigError> {
        let mut values = flags;
        let mut warnings = Vec::new();
        for (k, v) in file {
            if k == "command" {
                continue;
            }
            if !allowed.contains(&k.as_str()) {
                return Err(config_error(&k, "unknown key for this command"));
            }
            if let Some(old) = values.get(&k) {
                if *old != v {
                    warnings.push(format!("config file overrides --{} ({} -> {})", k.replace('_', "-"), old, v));
                }
            }
            values.insert(k, v);
        }
        Ok(Self { values, warnings })
    }

    pub fn values(&self) -> &BTreeMap<String, String> {
        &self.values
    }

    /// SHA-256 of the command and the sorted `key=value` lines, without
    /// the output directory.
    pub fn hash(&self, command: &str) -> String {
        let mut h = Sha256::new();
        h.update(format!("command={command}\n"));
        for (k, v) in self.values.iter().filter(|(k, _)| k.as_str() != "out") {
            h.update(format!("{k}={v}\n"));
        }
        format!("{:x}", h.finalize())
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(|s| s.as_str())
    }

    pub fn parse<T: FromStr>(&self, key: &str) -> Result<Option<T>, ConfigError> {
        match self.raw(key) {
            None => Ok(None),
            Some(s) => s
                .parse::<T>()
                .map(Some)
                .map_err(|_| config_error(key, format!("cannot parse {s:?}"))),
        }
    }

    pub fn get<T: FromStr>(&self, key: &str, default: T) -> Result<T, ConfigError> {
        Ok(self.parse(key)?.unwrap_or(default))
    }

    pub fn require<T: FromStr>(&self, key: &str) -> Result<T, ConfigError> {
        self.parse(key)?.ok_or_else(|| config_error(key, "required"))
    }

    pub fn flag(&self, key: &str, default: bool) -> Result<bool, ConfigError> {
        match self.raw(key) {
            None => Ok(default),
            Some("true" | "yes" | "1") => Ok(true),
            Some("false" | "no" | "0") => Ok(false),
            Some(s) => Err(config_error(key, format!("expected true or false, got {s:?}"))),
        }
    }

    pub fn finite(&self, key: &str, default: Option<f64>) -> Result<f64, ConfigError> {
        let v = match default {
            Some(d) => self.get(key, d)?,
            None => self.require(key)?,
        };
        if !v.is_finite() {
            return Err(config_error(key, "must be finite"));
        }
        Ok(v)
    }

    pub fn positive(&self, key: &str, default: Option<f64>) -> Result<f64, ConfigError> {
        let v = self.finite(key, default)?;
        if v <= 0.0 {
            return Err(config_error(key, format!("must be positive, got {v}")));
        }
        Ok(v)
    }

    pub fn count(&self, key: &str, default: usize) -> Result<usize, ConfigError> {
        let v = self.get(key, default)?;
        if v == 0 {
            return Err(config_error(key, "must be at least 1"));
        }
        Ok(v)
    }

    pub fn range(&self, key: &str, default: &str) -> Result<Vec<f64>, ConfigError> {
        parse_range(self.raw(key).unwrap_or(default)).map_err(|m| config_error(key, m))
    }
}

/// `start:stop:count`, log-spaced and inclusive, or a single value.
pub fn parse_range(s: &str) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = s.split(':').map(str::trim).collect();
    let num = |t: &str| t.parse::<f64>().map_err(|_| format!("not a number: {t:?}"));
    match parts.as_slice() {
        [v] => {
            let v = num(v)?;
            if !(v > 0.0 && v.is_finite()) {
                return Err(format!("values must be positive, got {v}"));
            }
            Ok(vec![v])
        }
        [a, b, n] => {
            let (a, b) = (num(a)?, num(b)?);
            let n: usize = n.parse().map_err(|_| format!("not a count: {n:?}"))?;
            if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) {
                return Err("log-spaced ranges need positive end points".into());
            }
            match n {
                0 => Err("count must be at least 1".into()),
                1 if a == b => Ok(vec![a]),
                1 => Err("a single point needs start = stop".into()),
                _ => {
                    let (la, lb) = (a.ln(), b.ln());
                    Ok((0..n)
                        .map(|i| match i {
                            0 => a,
                            i if i == n - 1 => b,
                            i => (la + (lb - la) * i as f64 / (n - 1) as f64).exp(),
                        })
                        .collect())
                }
            }
        }
        _ => Err(format!("expected start:stop:count, got {s:?}")),
    }
}
