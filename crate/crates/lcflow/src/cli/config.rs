//! Flat `key = value` configuration with command-line overrides.

use std::collections::BTreeMap;

use crate::error::{Error, Result};

/// Resolved key-value map. Every key must have a default, so unknown keys
/// are caught when a file or flag is applied.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct Config {
    values: BTreeMap<String, String>,
}

impl Config {
    pub fn with_defaults(defaults: &[(&str, &str)]) -> Self {
        Config {
            values: defaults
                .iter()
                .map(|(k, v)| (k.to_string(), v.to_string()))
                .collect(),
        }
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match self.values.get_mut(key) {
            Some(v) => {
                *v = value.trim().to_string();
                Ok(())
            }
            None => {
                let known: Vec<&str> = self.values.keys().map(String::as_str).collect();
                Err(Error::Config(format!(
                    "unknown key `{key}` (known: {})",
                    known.join(", ")
                )))
            }
        }
    }

    /// Applies a `key = value` text. Blank lines and `#` comments are skipped.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (no, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!(
                    "line {}: expected `key = value`, got `{line}`",
                    no + 1
                ))
            })?;
            self.set(k.trim(), v)?;
        }
        Ok(())
    }

    pub fn entries(&self) -> impl Iterator<Item = (&str, &str)> {
        self.values.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    pub fn str(&self, key: &str) -> Result<&str> {
        self.values
            .get(key)
            .map(String::as_str)
            .ok_or_else(|| Error::Config(format!("missing key `{key}`")))
    }

    pub fn f64(&self, key: &str) -> Result<f64> {
        let v = self.str(key)?;
        v.parse()
            .map_err(|_| Error::Config(format!("`{key}` = `{v}` is not a number")))
    }

    pub fn usize(&self, key: &str) -> Result<usize> {
        let v = self.str(key)?;
        v.parse()
            .map_err(|_| Error::Config(format!("`{key}` = `{v}` is not a non-negative integer")))
    }

    /// `auto` maps to `None`.
    pub fn opt_usize(&self, key: &str) -> Result<Option<usize>> {
        if self.str(key)? == "auto" {
            return Ok(None);
        }
        self.usize(key).map(Some)
    }

    pub fn opt_f64(&self, key: &str) -> Result<Option<f64>> {
        if self.str(key)? == "auto" {
            return Ok(None);
        }
        self.f64(key).map(Some)
    }

    /// Comma-separated list.
    pub fn f64_list(&self, key: &str) -> Result<Vec<f64>> {
        let v = self.str(key)?;
        v.split(',')
            .map(|x| {
                x.trim()
                    .parse()
                    .map_err(|_| Error::Config(format!("`{key}` = `{v}`: `{x}` is not a number")))
            })
            .collect()
    }

    pub fn usize_list(&self, key: &str) -> Result<Vec<usize>> {
        let v = self.str(key)?;
        v.split(',')
            .map(|x| {
                x.trim()
                    .parse()
                    .map_err(|_| Error::Config(format!("`{key}` = `{v}`: `{x}` is not an integer")))
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> Config {
        Config::with_defaults(&[("L", "-0.5"), ("eps", "0.1,0.05"), ("nodes", "auto")])
    }

    #[test]
    fn file_then_override() {
        let mut c = cfg();
        c.apply_text("# sweep\nL = -1.0\n\neps = 0.04, 0.02  # two values\n")
            .unwrap();
        c.set("L", "-0.25").unwrap();
        assert_eq!(c.f64("L").unwrap(), -0.25);
        assert_eq!(c.f64_list("eps").unwrap(), vec![0.04, 0.02]);
        assert_eq!(c.opt_usize("nodes").unwrap(), None);
        c.set("nodes", "128").unwrap();
        assert_eq!(c.opt_usize("nodes").unwrap(), Some(128));
    }

    #[test]
    fn rejects_unknown_and_malformed() {
        let mut c = cfg();
        assert!(matches!(c.set("gamma", "1"), Err(Error::Config(_))));
        assert!(c.apply_text("L -1").is_err());
        c.set("L", "abc").unwrap();
        assert!(c.f64("L").is_err());
    }
}
