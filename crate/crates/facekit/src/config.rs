//! Flat key-value configuration.
//!
//! One namespace of dotted string keys (`kalman.q`, `sg.radius`) shared by
//! config files and command-line overrides. Files hold `key = value` lines
//! with `#` comments. Consumers pull typed values out and reject keys they
//! do not recognize, so typos fail loudly instead of silently using
//! defaults.

use std::collections::BTreeMap;
use std::io::BufRead;
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ConfigMap {
    entries: BTreeMap<String, String>,
}

impl ConfigMap {
    pub fn new() -> Self {
        ConfigMap::default()
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Self::from_reader(std::io::BufReader::new(file))
    }

    pub fn from_reader<R: BufRead>(reader: R) -> Result<Self> {
        let mut map = ConfigMap::new();
        for (idx, line) in reader.lines().enumerate() {
            let line = line?;
            let line_no = idx + 1;
            let content = line.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let Some((key, value)) = content.split_once('=') else {
                return Err(Error::Parse {
                    line: line_no,
                    column: 1,
                    msg: format!("expected `key = value`, found {content:?}"),
                });
            };
            let key = key.trim();
            if key.is_empty() {
                return Err(Error::Parse {
                    line: line_no,
                    column: 1,
                    msg: "configuration key must not be empty".into(),
                });
            }
            map.set(key, value.trim());
        }
        Ok(map)
    }

    /// Inserts or overwrites; later writes win, which is how command-line
    /// overrides take precedence over file values.
    pub fn set(&mut self, key: impl Into<String>, value: impl Into<String>) {
        self.entries.insert(key.into(), value.into());
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn get_f64(&self, key: &str) -> Result<Option<f64>> {
        self.parse_with(key, |raw| raw.parse::<f64>().ok())
    }

    pub fn get_usize(&self, key: &str) -> Result<Option<usize>> {
        self.parse_with(key, |raw| raw.parse::<usize>().ok())
    }

    pub fn get_u64(&self, key: &str) -> Result<Option<u64>> {
        self.parse_with(key, |raw| raw.parse::<u64>().ok())
    }

    fn parse_with<T>(&self, key: &str, parse: impl Fn(&str) -> Option<T>) -> Result<Option<T>> {
        match self.get(key) {
            None => Ok(None),
            Some(raw) => parse(raw).map(Some).ok_or_else(|| Error::InvalidConfig {
                msg: format!("could not parse {key} value {raw:?}"),
            }),
        }
    }

    /// Fails if any stored key is missing from `known`.
    pub fn ensure_known(&self, known: &[&str]) -> Result<()> {
        let unknown: Vec<&str> = self
            .keys()
            .filter(|k| !known.contains(k))
            .collect();
        if unknown.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidConfig {
                msg: format!("unknown configuration keys: {}", unknown.join(", ")),
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_keys_comments_and_blank_lines() {
        let text = "\n# smoothing\nkalman.q = 0.01\nsg.radius=4   # window\n\nmode = cascade\n";
        let map = ConfigMap::from_reader(text.as_bytes()).unwrap();
        assert_eq!(map.get("kalman.q"), Some("0.01"));
        assert_eq!(map.get("sg.radius"), Some("4"));
        assert_eq!(map.get("mode"), Some("cascade"));
        assert_eq!(map.keys().count(), 3);
    }

    #[test]
    fn later_entries_override_earlier_ones() {
        let text = "kalman.q = 0.1\nkalman.q = 0.5\n";
        let map = ConfigMap::from_reader(text.as_bytes()).unwrap();
        assert_eq!(map.get("kalman.q"), Some("0.5"));
    }

    #[test]
    fn malformed_lines_carry_their_line_number() {
        let text = "kalman.q = 0.1\nthis is not a setting\n";
        match ConfigMap::from_reader(text.as_bytes()) {
            Err(Error::Parse { line: 2, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            ConfigMap::from_reader(&b"= 0.5\n"[..]),
            Err(Error::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn typed_getters_parse_or_complain() {
        let mut map = ConfigMap::new();
        map.set("a", "2.5");
        map.set("b", "7");
        map.set("c", "seven");
        assert_eq!(map.get_f64("a").unwrap(), Some(2.5));
        assert_eq!(map.get_usize("b").unwrap(), Some(7));
        assert_eq!(map.get_f64("missing").unwrap(), None);
        assert!(map.get_usize("c").is_err());
        assert!(map.get_usize("a").is_err());
    }

    #[test]
    fn unknown_keys_are_listed_in_the_error() {
        let mut map = ConfigMap::new();
        map.set("kalman.q", "0.1");
        map.set("kalman.qq", "0.1");
        map.set("zzz", "1");
        assert!(map.ensure_known(&["kalman.q", "kalman.qq", "zzz"]).is_ok());
        let err = map.ensure_known(&["kalman.q"]).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("kalman.qq") && msg.contains("zzz"), "{msg}");
        assert!(!msg.contains("kalman.q,"), "{msg}");
    }

    #[test]
    fn overrides_win_over_file_values() {
        let mut map = ConfigMap::from_reader(&b"sg.radius = 4\n"[..]).unwrap();
        map.set("sg.radius", "6");
        assert_eq!(map.get_usize("sg.radius").unwrap(), Some(6));
    }
}
