//! Flat key=value configuration with command-line overrides.
//!
//! A config file holds one `key = value` pair per line (`#` comments and
//! blank lines ignored). Every flag `--key value` overrides the file entry
//! of the same name. Each key read during experiment setup is recorded with
//! its resolved value, so the echoed configuration is fully explicit; keys
//! that were provided but never consumed are rejected.

use std::collections::{BTreeMap, BTreeSet};

use crate::CliError;

#[derive(Debug, Default)]
pub struct Config {
    provided: BTreeMap<String, String>,
    consumed: BTreeSet<String>,
    resolved: BTreeMap<String, String>,
}

impl Config {
    /// Splits argv into the subcommand and its key=value configuration,
    /// loading `--config PATH` first so that explicit flags win.
    pub fn from_args(args: &[String]) -> Result<(String, Config), CliError> {
        let mut iter = args.iter();
        let subcommand = iter
            .next()
            .ok_or_else(|| {
                CliError::Config("missing subcommand (try `noregret list-algorithms`)".into())
            })?
            .clone();
        let mut flags = BTreeMap::new();
        while let Some(arg) = iter.next() {
            let key = arg
                .strip_prefix("--")
                .ok_or_else(|| CliError::Config(format!("expected a --key, got `{arg}`")))?;
            let value = iter
                .next()
                .ok_or_else(|| CliError::Config(format!("flag --{key} is missing its value")))?;
            flags.insert(key.to_string(), value.clone());
        }

        let mut provided = BTreeMap::new();
        if let Some(path) = flags.remove("config") {
            let text = std::fs::read_to_string(&path)
                .map_err(|e| CliError::Config(format!("cannot read config file {path}: {e}")))?;
            for (lineno, line) in text.lines().enumerate() {
                let line = line.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let (key, value) = line.split_once('=').ok_or_else(|| {
                    CliError::Config(format!("{path}:{}: expected `key = value`", lineno + 1))
                })?;
                provided.insert(key.trim().to_string(), value.trim().to_string());
            }
        }
        provided.extend(flags);
        Ok((
            subcommand,
            Config {
                provided,
                consumed: BTreeSet::new(),
                resolved: BTreeMap::new(),
            },
        ))
    }

    fn raw(&mut self, key: &str) -> Option<String> {
        self.consumed.insert(key.to_string());
        self.provided.get(key).cloned()
    }

    fn record(&mut self, key: &str, value: impl ToString) {
        self.resolved.insert(key.to_string(), value.to_string());
    }

    pub fn str_or(&mut self, key: &str, default: &str) -> String {
        let value = self.raw(key).unwrap_or_else(|| default.to_string());
        self.record(key, &value);
        value
    }

    /// Optional key; the echo shows `absent_note` when it is not provided.
    pub fn opt_str(&mut self, key: &str, absent_note: &str) -> Option<String> {
        match self.raw(key) {
            Some(value) => {
                self.record(key, &value);
                Some(value)
            }
            None => {
                self.record(key, absent_note);
                None
            }
        }
    }

    pub fn require_str(&mut self, key: &str) -> Result<String, CliError> {
        let value = self
            .raw(key)
            .ok_or_else(|| CliError::Config(format!("missing required key `{key}`")))?;
        self.record(key, &value);
        Ok(value)
    }

    pub fn f64_or(&mut self, key: &str, default: f64) -> Result<f64, CliError> {
        match self.raw(key) {
            None => {
                self.record(key, default);
                Ok(default)
            }
            Some(text) => {
                let value: f64 = text.parse().map_err(|_| {
                    CliError::Config(format!("key `{key}`: `{text}` is not a number"))
                })?;
                self.record(key, value);
                Ok(value)
            }
        }
    }

    pub fn require_f64(&mut self, key: &str) -> Result<f64, CliError> {
        let text = self.require_str(key)?;
        text.parse()
            .map_err(|_| CliError::Config(format!("key `{key}`: `{text}` is not a number")))
    }

    pub fn u64_or(&mut self, key: &str, default: u64) -> Result<u64, CliError> {
        match self.raw(key) {
            None => {
                self.record(key, default);
                Ok(default)
            }
            Some(text) => {
                let value: u64 = text.parse().map_err(|_| {
                    CliError::Config(format!(
                        "key `{key}`: `{text}` is not a nonnegative integer"
                    ))
                })?;
                self.record(key, value);
                Ok(value)
            }
        }
    }

    pub fn usize_or(&mut self, key: &str, default: usize) -> Result<usize, CliError> {
        Ok(self.u64_or(key, default as u64)? as usize)
    }

    /// Comma-separated float list.
    pub fn f64_list_or(&mut self, key: &str, default: &[f64]) -> Result<Vec<f64>, CliError> {
        match self.raw(key) {
            None => {
                self.record(
                    key,
                    default
                        .iter()
                        .map(|v| v.to_string())
                        .collect::<Vec<_>>()
                        .join(","),
                );
                Ok(default.to_vec())
            }
            Some(text) => {
                let mut out = Vec::new();
                for part in text.split(',') {
                    out.push(part.trim().parse().map_err(|_| {
                        CliError::Config(format!("key `{key}`: `{part}` is not a number"))
                    })?);
                }
                self.record(key, &text);
                Ok(out)
            }
        }
    }

    /// Rejects keys that no code path consumed (typos, wrong subcommand).
    pub fn reject_unknown(&self) -> Result<(), CliError> {
        let unknown: Vec<&String> = self
            .provided
            .keys()
            .filter(|k| !self.consumed.contains(*k))
            .collect();
        if unknown.is_empty() {
            Ok(())
        } else {
            Err(CliError::Config(format!(
                "unknown key(s): {}",
                unknown
                    .iter()
                    .map(|s| s.as_str())
                    .collect::<Vec<_>>()
                    .join(", ")
            )))
        }
    }

    /// Echo of the fully resolved run, one `key = value` line per key.
    pub fn echo(&self) -> String {
        self.resolved
            .iter()
            .map(|(k, v)| format!("{k} = {v}"))
            .collect::<Vec<_>>()
            .join("\n")
    }
}
