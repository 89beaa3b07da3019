//! Flat `key = value` text files.
//!
//! `#` starts a comment, blank lines are ignored, keys may appear once.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::geometry::Vec3;

#[derive(Debug, Clone)]
pub struct Entry {
    pub value: String,
    pub line: usize,
}

/// Parsed file with consumption tracking, so leftover keys can be reported.
#[derive(Debug, Default)]
pub struct KvFile {
    entries: BTreeMap<String, Entry>,
}

impl KvFile {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| Error::Config {
                line,
                msg: format!("expected `key = value`, got `{content}`"),
            })?;
            let key = key.trim();
            if key.is_empty() || key.contains(char::is_whitespace) {
                return Err(Error::Config {
                    line,
                    msg: format!("invalid key `{key}`"),
                });
            }
            let entry = Entry {
                value: value.trim().to_string(),
                line,
            };
            if let Some(prev) = entries.insert(key.to_string(), entry) {
                return Err(Error::Config {
                    line,
                    msg: format!("duplicate key `{key}` (first set on line {})", prev.line),
                });
            }
        }
        Ok(KvFile { entries })
    }

    pub fn take(&mut self, key: &str) -> Option<Entry> {
        self.entries.remove(key)
    }

    /// Errors on the first key nobody consumed.
    pub fn finish(self) -> Result<()> {
        match self.entries.into_iter().min_by_key(|(_, e)| e.line) {
            Some((key, e)) => Err(Error::Config {
                line: e.line,
                msg: format!("unknown key `{key}`"),
            }),
            None => Ok(()),
        }
    }

    pub fn f64(&mut self, key: &str) -> Result<Option<f64>> {
        self.take(key).map(|e| parse_f64(key, &e)).transpose()
    }

    pub fn require_f64(&mut self, key: &str) -> Result<f64> {
        self.f64(key)?
            .ok_or_else(|| Error::ConfigValue(format!("missing required key `{key}`")))
    }

    pub fn usize(&mut self, key: &str) -> Result<Option<usize>> {
        self.take(key)
            .map(|e| {
                e.value.parse::<usize>().map_err(|_| Error::Config {
                    line: e.line,
                    msg: format!("`{key}` expects a non-negative integer, got `{}`", e.value),
                })
            })
            .transpose()
    }

    pub fn list_f64(&mut self, key: &str) -> Result<Option<Vec<f64>>> {
        self.take(key)
            .map(|e| {
                e.value
                    .split(',')
                    .map(|s| {
                        parse_f64(
                            key,
                            &Entry {
                                value: s.trim().into(),
                                line: e.line,
                            },
                        )
                    })
                    .collect()
            })
            .transpose()
    }

    pub fn list_u64(&mut self, key: &str) -> Result<Option<Vec<u64>>> {
        self.take(key)
            .map(|e| {
                parse_u64_list(&e.value).map_err(|msg| Error::Config {
                    line: e.line,
                    msg: format!("`{key}`: {msg}"),
                })
            })
            .transpose()
    }

    pub fn vec3(&mut self, key: &str) -> Result<Option<Vec3>> {
        match self.list_f64(key)? {
            None => Ok(None),
            Some(v) if v.len() == 3 => Ok(Some(Vec3::new(v[0], v[1], v[2]))),
            Some(v) => Err(Error::ConfigValue(format!(
                "`{key}` expects three comma-separated numbers, got {}",
                v.len()
            ))),
        }
    }

    pub fn string(&mut self, key: &str) -> Option<String> {
        self.take(key).map(|e| e.value)
    }
}

fn parse_f64(key: &str, e: &Entry) -> Result<f64> {
    match e.value.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => {
            let hint = if e.value.chars().any(|c| c.is_ascii_alphabetic()) {
                " (units belong in the key name; give a plain number)"
            } else {
                ""
            };
            Err(Error::Config {
                line: e.line,
                msg: format!("`{key}` expects a finite number, got `{}`{hint}", e.value),
            })
        }
    }
}

/// Parses `1,2,5` or ranges like `1..20` (inclusive), or a mix.
pub fn parse_u64_list(text: &str) -> std::result::Result<Vec<u64>, String> {
    let mut out = Vec::new();
    for part in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        if let Some((a, b)) = part.split_once("..") {
            let a: u64 = a
                .trim()
                .parse()
                .map_err(|_| format!("bad range start `{a}`"))?;
            let b: u64 = b
                .trim()
                .parse()
                .map_err(|_| format!("bad range end `{b}`"))?;
            if b < a {
                return Err(format!("empty range `{part}`"));
            }
            out.extend(a..=b);
        } else {
            out.push(part.parse().map_err(|_| format!("bad integer `{part}`"))?);
        }
    }
    if out.is_empty() {
        return Err("empty list".into());
    }
    Ok(out)
}
