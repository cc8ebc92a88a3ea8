//! Resolved run settings: command-line flags override the `key=value`
//! config file, which overrides built-in defaults.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};

#[derive(Debug, Default)]
pub struct Settings {
    cli: BTreeMap<String, String>,
    file: BTreeMap<String, String>,
    resolved: BTreeMap<String, String>,
}

/// Parses `key=value` lines; `#` starts a comment, blank lines are skipped.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| anyhow!("config line {}: expected key=value, got '{raw}'", n + 1))?;
        let key = k.trim().replace('-', "_");
        if key.is_empty() {
            bail!("config line {}: empty key", n + 1);
        }
        if out.insert(key.clone(), v.trim().to_string()).is_some() {
            bail!("config line {}: duplicate key '{key}'", n + 1);
        }
    }
    Ok(out)
}

impl Settings {
    pub fn new(config: Option<&Path>) -> Result<Self> {
        let file = match config {
            Some(p) => {
                let text = std::fs::read_to_string(p).with_context(|| format!("reading config {}", p.display()))?;
                parse_config(&text)?
            }
            None => BTreeMap::new(),
        };
        Ok(Settings {
            file,
            ..Default::default()
        })
    }

    pub fn flag<T: ToString>(&mut self, key: &str, value: Option<T>) {
        if let Some(v) = value {
            self.cli.insert(key.to_string(), v.to_string());
        }
    }

    fn raw(&self, key: &str) -> Option<String> {
        self.cli.get(key).or_else(|| self.file.get(key)).cloned()
    }

    /// Resolved string value, recording it for the manifest.
    pub fn text(&mut self, key: &str, default: impl Display) -> String {
        let v = self.raw(key).unwrap_or_else(|| default.to_string());
        self.resolved.insert(key.to_string(), v.clone());
        v
    }

    pub fn get<T>(&mut self, key: &str, default: T) -> Result<T>
    where
        T: FromStr + Display,
        T::Err: Display,
    {
        match self.raw(key) {
            Some(s) => {
                let v = s.parse::<T>().map_err(|e| anyhow!("bad value '{s}' for {key}: {e}"))?;
                self.resolved.insert(key.to_string(), s);
                Ok(v)
            }
            None => {
                self.resolved.insert(key.to_string(), default.to_string());
                Ok(default)
            }
        }
    }

    /// Comma-separated list.
    pub fn list<T>(&mut self, key: &str, default: &[T]) -> Result<Vec<T>>
    where
        T: FromStr + Display,
        T::Err: Display,
    {
        let joined = default.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
        let s = self.text(key, joined);
        s.split(',')
            .map(str::trim)
            .filter(|t| !t.is_empty())
            .map(|t| t.parse::<T>().map_err(|e| anyhow!("bad entry '{t}' in {key}: {e}")))
            .collect()
    }

    /// Errors on config-file keys the command never asked for.
    pub fn check_unused(&self) -> Result<()> {
        let unused: Vec<&String> = self.file.keys().filter(|k| !self.resolved.contains_key(*k)).collect();
        if !unused.is_empty() {
            bail!(
                "unknown config keys for this command: {}",
                unused.iter().map(|s| s.as_str()).collect::<Vec<_>>().join(", ")
            );
        }
        Ok(())
    }

    pub fn resolved(&self) -> &BTreeMap<String, String> {
        &self.resolved
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precedence() {
        let mut s = Settings {
            file: parse_config("epochs = 10\nbase-lr=0.5 # comment\n").unwrap(),
            ..Default::default()
        };
        s.flag("epochs", Some(20));
        assert_eq!(s.get("epochs", 1usize).unwrap(), 20);
        assert_eq!(s.get("base_lr", 1.0f64).unwrap(), 0.5);
        assert_eq!(s.get("seed", 3u64).unwrap(), 3);
        assert_eq!(s.resolved()["seed"], "3");
        s.check_unused().unwrap();
    }

    #[test]
    fn bad_config() {
        assert!(parse_config("novalue\n").is_err());
        assert!(parse_config("a=1\na=2\n").is_err());
        let s = Settings {
            file: parse_config("typo=1").unwrap(),
            ..Default::default()
        };
        assert!(s.check_unused().is_err());
    }
}
