//! Plain-text `key = value` configuration. Blank lines and lines starting
//! with `#` are ignored; later keys override earlier ones.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Config {
    entries: BTreeMap<String, String>,
}

impl Config {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(Error::Config { line: i + 1, message: format!("expected key = value, got {line:?}") });
            };
            let key = k.trim().replace('_', "-");
            if key.is_empty() {
                return Err(Error::Config { line: i + 1, message: "empty key".into() });
            }
            entries.insert(key, v.trim().to_string());
        }
        Ok(Self { entries })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    /// Raw value; `_` and `-` are interchangeable in keys.
    pub fn raw(&self, key: &str) -> Option<&str> {
        self.entries.get(&key.replace('_', "-")).map(String::as_str)
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        self.raw(key)
            .map(|v| v.parse::<T>().map_err(|e| Error::Usage(format!("config key {key}: {e}"))))
            .transpose()
    }

    /// Comma-separated list.
    pub fn get_list<T: FromStr>(&self, key: &str) -> Result<Option<Vec<T>>>
    where
        T::Err: std::fmt::Display,
    {
        self.raw(key).map(|v| parse_list(v).map_err(|e| Error::Usage(format!("config key {key}: {e}")))).transpose()
    }

    /// The command-line value when given, otherwise the config value.
    pub fn pick<T: FromStr>(&self, cli: Option<T>, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        match cli {
            Some(v) => Ok(Some(v)),
            None => self.get(key),
        }
    }

    pub fn pick_list<T: FromStr>(&self, cli: Option<Vec<T>>, key: &str) -> Result<Option<Vec<T>>>
    where
        T::Err: std::fmt::Display,
    {
        match cli {
            Some(v) => Ok(Some(v)),
            None => self.get_list(key),
        }
    }
}

pub fn parse_list<T: FromStr>(s: &str) -> std::result::Result<Vec<T>, String>
where
    T::Err: std::fmt::Display,
{
    s.split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|p| p.parse::<T>().map_err(|e| format!("{p:?}: {e}")))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_overrides() {
        let cfg = Config::parse("# plan\nseed = 7\nh_values = 0.05, 0.1\n\nthreads=2\nseed=9\n").unwrap();
        assert_eq!(cfg.get::<u64>("seed").unwrap(), Some(9));
        assert_eq!(cfg.get_list::<f64>("h-values").unwrap(), Some(vec![0.05, 0.1]));
        assert_eq!(cfg.pick(Some(4usize), "threads").unwrap(), Some(4));
        assert_eq!(cfg.pick(None::<usize>, "threads").unwrap(), Some(2));
        assert_eq!(cfg.get::<u64>("missing").unwrap(), None);
    }

    #[test]
    fn reports_bad_lines() {
        assert!(matches!(Config::parse("seed 7"), Err(Error::Config { line: 1, .. })));
        let cfg = Config::parse("seed = x").unwrap();
        assert!(cfg.get::<u64>("seed").is_err());
    }
}
