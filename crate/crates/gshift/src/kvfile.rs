//! Minimal flat key-value configuration format.
//!
//! Lines are `key = value`; `#` starts a comment; `[section]` headers prefix
//! the keys that follow with `section.`. Order is preserved and duplicate
//! keys are rejected.

use crate::error::{Error, Result};

/// Parsed key-value document with insertion order preserved.
#[derive(Debug, Clone, Default)]
pub struct KvFile {
    entries: Vec<(String, String)>,
}

impl KvFile {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries: Vec<(String, String)> = Vec::new();
        let mut section = String::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = match raw.find('#') {
                Some(pos) => &raw[..pos],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
                section = name.trim().to_string();
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::Config(format!(
                    "line {}: expected `key = value`, got {:?}",
                    lineno + 1,
                    raw
                )));
            };
            let full_key = if section.is_empty() {
                key.trim().to_string()
            } else {
                format!("{}.{}", section, key.trim())
            };
            if entries.iter().any(|(k, _)| *k == full_key) {
                return Err(Error::Config(format!("duplicate key {:?}", full_key)));
            }
            entries.push((full_key, value.trim().to_string()));
        }
        Ok(Self { entries })
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|(k, _)| k.as_str())
    }

    pub fn get_f64(&self, key: &str) -> Result<Option<f64>> {
        match self.get(key) {
            None => Ok(None),
            Some(v) => {
                let v = v.trim();
                if v.eq_ignore_ascii_case("inf") || v.eq_ignore_ascii_case("infinity") {
                    return Ok(Some(f64::INFINITY));
                }
                v.parse::<f64>()
                    .map(Some)
                    .map_err(|_| Error::Config(format!("key {:?}: expected a number, got {:?}", key, v)))
            }
        }
    }

    pub fn get_usize(&self, key: &str) -> Result<Option<usize>> {
        match self.get(key) {
            None => Ok(None),
            Some(v) => v
                .trim()
                .parse::<usize>()
                .map(Some)
                .map_err(|_| Error::Config(format!("key {:?}: expected an integer, got {:?}", key, v))),
        }
    }
}
