//! `key = value` run configuration. Command-line flags win over the file.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};

#[derive(Debug, Clone, Default)]
pub struct ConfigFile {
    entries: BTreeMap<String, String>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("cannot read config file {}", path.display()))?;
        Self::parse(&text)
    }

    /// Lines are `key = value`; `#` starts a comment. Keys may be spelled
    /// with `-` or `_`.
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                bail!("config line {}: expected key = value, got {raw:?}", no + 1);
            };
            let key = k.trim().replace('_', "-");
            if key.is_empty() {
                bail!("config line {}: empty key", no + 1);
            }
            entries.insert(key, v.trim().to_string());
        }
        Ok(Self { entries })
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    /// The flag value if present, otherwise the parsed config value.
    pub fn pick<T: FromStr>(&self, flag: Option<T>, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.raw(key) {
            None => Ok(None),
            Some(v) => v.parse::<T>().map(Some).map_err(|e| anyhow!("config key {key}: cannot parse {v:?}: {e}")),
        }
    }

    pub fn pick_or<T: FromStr>(&self, flag: Option<T>, key: &str, default: T) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        Ok(self.pick(flag, key)?.unwrap_or(default))
    }

    pub fn require<T: FromStr>(&self, flag: Option<T>, key: &str) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        self.pick(flag, key)?.ok_or_else(|| anyhow!("missing --{key} (flag or config key)"))
    }
}

/// Grid sizes below this are rejected.
pub const MIN_GRID: usize = 8;

pub fn check_grid(n: usize) -> Result<usize> {
    if n < MIN_GRID {
        bail!("grid size {n} is below {MIN_GRID}");
    }
    Ok(n)
}

pub fn check_tol(t: f64) -> Result<f64> {
    if t.is_nan() || t <= 0.0 || t.is_infinite() {
        bail!("tolerance must be positive, got {t}");
    }
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file() {
        let c = ConfigFile::parse("psi = zeta:1,2,1,1\n# comment\nseed=4 # trailing\ndelta_range = 1:10\n").unwrap();
        assert_eq!(c.raw("delta-range"), Some("1:10"));
        assert_eq!(c.pick::<u64>(None, "seed").unwrap(), Some(4));
        assert_eq!(c.pick(Some(9u64), "seed").unwrap(), Some(9));
        assert!(c.pick::<u64>(None, "psi").is_err());
        assert!(ConfigFile::parse("no equals sign").is_err());
    }

    #[test]
    fn limits() {
        assert!(check_grid(7).is_err());
        assert!(check_tol(0.0).is_err());
        assert_eq!(check_tol(1e-6).unwrap(), 1e-6);
    }
}
