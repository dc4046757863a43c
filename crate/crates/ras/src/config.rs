//! Flat `key = value` configuration files.
//!
//! Keys are the long flag names without the leading dashes (`rho-con`,
//! `budget`, ...); underscores are accepted in place of dashes. Blank lines
//! and lines starting with `#` are ignored. Explicit command line flags take
//! precedence over file values.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigFile {
    values: BTreeMap<String, String>,
}

impl ConfigFile {
    pub fn parse(text: &str, allowed: &[&str]) -> Result<Self> {
        let mut values = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::parse(i + 1, format!("expected `key = value`, got `{line}`"))
            })?;
            let key = key.trim().replace('_', "-");
            if !allowed.contains(&key.as_str()) {
                return Err(Error::parse(i + 1, format!("unknown key `{key}`")));
            }
            if values
                .insert(key.clone(), value.trim().to_string())
                .is_some()
            {
                return Err(Error::parse(i + 1, format!("duplicate key `{key}`")));
            }
        }
        Ok(Self { values })
    }

    pub fn load(path: &Path, allowed: &[&str]) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, allowed).map_err(|e| Error::Usage(format!("{}: {e}", path.display())))
    }

    pub fn get_raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    /// Flag value if given, else the parsed file value, else `None`.
    pub fn resolve<T: FromStr>(&self, flag: Option<T>, key: &str) -> Result<Option<T>> {
        if flag.is_some() {
            return Ok(flag);
        }
        self.get_raw(key)
            .map(|raw| {
                raw.parse()
                    .map_err(|_| Error::Usage(format!("config key `{key}`: invalid value `{raw}`")))
            })
            .transpose()
    }
}

/// Splits a comma-separated list.
pub fn parse_list<T: FromStr>(raw: &str, what: &str) -> Result<Vec<T>> {
    raw.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse()
                .map_err(|_| Error::Usage(format!("invalid {what} `{s}`")))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const KEYS: &[&str] = &["budget", "rho-con", "function"];

    #[test]
    fn parses_and_resolves() {
        let cfg = ConfigFile::parse(
            "# campaign\nbudget = 500\nrho_con=0.1\n\nfunction = paraboloid\n",
            KEYS,
        )
        .unwrap();
        assert_eq!(cfg.resolve::<usize>(None, "budget").unwrap(), Some(500));
        assert_eq!(cfg.resolve(Some(7usize), "budget").unwrap(), Some(7));
        assert_eq!(cfg.resolve::<f64>(None, "rho-con").unwrap(), Some(0.1));
        assert_eq!(
            cfg.resolve::<String>(None, "function").unwrap().as_deref(),
            Some("paraboloid")
        );
        assert_eq!(cfg.resolve::<u64>(None, "seed").unwrap(), None);
    }

    #[test]
    fn rejects_bad_files() {
        assert!(ConfigFile::parse("budget 5", KEYS).is_err());
        assert!(ConfigFile::parse("colour = red", KEYS).is_err());
        assert!(ConfigFile::parse("budget = 1\nbudget = 2", KEYS).is_err());
        let cfg = ConfigFile::parse("budget = lots", KEYS).unwrap();
        assert!(cfg.resolve::<usize>(None, "budget").is_err());
    }

    #[test]
    fn lists() {
        assert_eq!(
            parse_list::<usize>("1, 2,3,", "dim").unwrap(),
            vec![1, 2, 3]
        );
        assert!(parse_list::<f64>("0.1,x", "ratio").is_err());
    }
}
