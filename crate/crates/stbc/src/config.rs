//! Flat `key = value` configuration files.
//!
//! One setting per line, `#` starts a comment, blank lines are ignored and
//! a key may appear only once. Every key can also be given as a command-line
//! flag of the same name, which takes precedence. Recognized keys:
//!
//! | key | meaning |
//! |---|---|
//! | `code` | catalog code name |
//! | `mod` | QAM size (4, 16, 64) |
//! | `snr` | comma-separated SNR grid in dB, strictly increasing |
//! | `seed` | master seed |
//! | `threads` | worker threads (0 = all cores) |
//! | `out` | output path |
//! | `decoder` | `exhaustive`, `sphere` or `fast` |
//! | `n_r` | receive antennas |
//! | `min_errors` | codeword errors that end an SNR point |
//! | `max_trials` | trial cap per SNR point |
//! | `batch` | trials simulated between stopping checks |
//! | `trials` | audit trials |
//! | `budget` | enumeration budget (difference vectors or codewords) |
//! | `samples` | random differences in consistency mode |
//! | `max_rank` | largest rank binned by `spectrum` |
//! | `n_cap` | `N` of the `U` search |
//! | `screen_weight` | nonzero symbols in screened differences |
//! | `screen_budget` | screened candidates given the full count |
//! | `pinned` | `;`-separated tuples `a,b,c,d` always fully counted |
//! | `results` | directory scanned by `tables` |
//!
//! `threads` and `out` do not enter the configuration digest, so runs that
//! differ only in them are recorded as the same configuration.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use sha2::{Digest, Sha256};

use crate::{Error, Result};

pub const KEYS: [&str; 20] = [
    "code",
    "mod",
    "snr",
    "seed",
    "threads",
    "out",
    "decoder",
    "n_r",
    "min_errors",
    "max_trials",
    "batch",
    "trials",
    "budget",
    "samples",
    "max_rank",
    "n_cap",
    "screen_weight",
    "screen_budget",
    "pinned",
    "results",
];

/// Keys that cannot change any result.
pub const NON_SEMANTIC_KEYS: [&str; 2] = ["threads", "out"];

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct KvConfig {
    entries: BTreeMap<String, String>,
}

impl KvConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(Error::ConfigInvalid(format!("line {}: expected key = value", n + 1)));
            };
            let (k, v) = (k.trim(), v.trim());
            if !KEYS.contains(&k) {
                return Err(Error::ConfigInvalid(format!("line {}: unknown key `{k}`", n + 1)));
            }
            if entries.insert(k.to_string(), v.to_string()).is_some() {
                return Err(Error::ConfigInvalid(format!("line {}: duplicate key `{k}`", n + 1)));
            }
        }
        Ok(KvConfig { entries })
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        self.entries.insert(key.to_string(), value.into());
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn parsed<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        self.get(key)
            .map(|v| v.parse().map_err(|_| Error::ConfigInvalid(format!("`{key}`: cannot parse `{v}`"))))
            .transpose()
    }

    pub fn parsed_or<T: FromStr>(&self, key: &str, default: T) -> Result<T> {
        Ok(self.parsed(key)?.unwrap_or(default))
    }

    /// Sorted `key=value` lines of the settings that affect results.
    pub fn canonical(&self) -> String {
        self.entries
            .iter()
            .filter(|(k, _)| !NON_SEMANTIC_KEYS.contains(&k.as_str()))
            .map(|(k, v)| format!("{k}={v}\n"))
            .collect()
    }

    /// SHA-256 of [`KvConfig::canonical`], hex.
    pub fn digest(&self) -> String {
        hex::encode(Sha256::digest(self.canonical().as_bytes()))
    }
}

/// Parses `"6, 8,10"` into `[6.0, 8.0, 10.0]`.
pub fn parse_list<T: FromStr>(s: &str, key: &str) -> Result<Vec<T>> {
    s.split(',')
        .map(str::trim)
        .filter(|x| !x.is_empty())
        .map(|x| x.parse().map_err(|_| Error::ConfigInvalid(format!("`{key}`: cannot parse `{x}`"))))
        .collect()
}

/// Parses `"1,2,5,6; 0,0,0,1"` into exponent tuples.
pub fn parse_tuples(s: &str) -> Result<Vec<[u32; 4]>> {
    s.split(';')
        .map(str::trim)
        .filter(|x| !x.is_empty())
        .map(|t| {
            let v: Vec<u32> = parse_list(t, "pinned")?;
            v.try_into().map_err(|_| Error::ConfigInvalid(format!("`pinned`: `{t}` is not four exponents")))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_digest() {
        let a = KvConfig::parse("# sweep\ncode = golden\nmod=4\nsnr = 6,8 # dB\n\nthreads=8\n").unwrap();
        assert_eq!(a.get("code"), Some("golden"));
        assert_eq!(a.parsed::<usize>("mod").unwrap(), Some(4));
        assert_eq!(parse_list::<f64>(a.get("snr").unwrap(), "snr").unwrap(), [6.0, 8.0]);
        let mut b = a.clone();
        b.set("threads", "1");
        b.set("out", "elsewhere.csv");
        assert_eq!(a.digest(), b.digest());
        b.set("seed", "3");
        assert_ne!(a.digest(), b.digest());
    }

    #[test]
    fn rejects_bad_lines() {
        for bad in ["code golden", "colour = red", "seed=1\nseed=2"] {
            assert!(matches!(KvConfig::parse(bad), Err(Error::ConfigInvalid(_))), "{bad}");
        }
        let c = KvConfig::parse("mod = four").unwrap();
        assert!(c.parsed::<usize>("mod").is_err());
    }

    #[test]
    fn tuples() {
        assert_eq!(parse_tuples("1,2,5,6; 3,4,5,13").unwrap(), [[1, 2, 5, 6], [3, 4, 5, 13]]);
        assert!(parse_tuples("1,2,3").is_err());
    }
}
