//! Flat `key = value` run configuration, one pair per line, `#` starts a comment.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use clap::ValueEnum;

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Experiment {
    BathSim,
    PointerSim,
    Survival,
    Dwell,
    Sweep,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::BathSim => "bath-sim",
            Experiment::PointerSim => "pointer-sim",
            Experiment::Survival => "survival",
            Experiment::Dwell => "dwell",
            Experiment::Sweep => "sweep",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

/// Parsed key-value pairs in file order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Params {
    entries: Vec<(String, String)>,
}

impl Params {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries: Vec<(String, String)> = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(CliError::config(
                    format!("line {}", lineno + 1),
                    format!("expected `key = value`, got `{line}`"),
                ));
            };
            let (key, value) = (key.trim(), value.trim());
            if key.is_empty() {
                return Err(CliError::config(format!("line {}", lineno + 1), "empty key"));
            }
            if value.is_empty() {
                return Err(CliError::config(key, "empty value"));
            }
            if entries.iter().any(|(k, _)| k == key) {
                return Err(CliError::config(key, "given more than once"));
            }
            entries.push((key.to_string(), value.to_string()));
        }
        Ok(Self { entries })
    }

    pub fn from_pairs<K: Into<String>, V: Into<String>>(pairs: impl IntoIterator<Item = (K, V)>) -> Self {
        Self { entries: pairs.into_iter().map(|(k, v)| (k.into(), v.into())).collect() }
    }

    pub fn entries(&self) -> &[(String, String)] {
        &self.entries
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn contains(&self, key: &str) -> bool {
        self.get(key).is_some()
    }

    /// Rejects any key outside `allowed`.
    pub fn restrict_to(&self, allowed: &[&str]) -> Result<()> {
        match self.entries.iter().find(|(k, _)| !allowed.contains(&k.as_str())) {
            Some((k, _)) => {
                Err(CliError::config(k.as_str(), format!("unknown key; expected one of {}", allowed.join(", "))))
            }
            None => Ok(()),
        }
    }

    fn parsed<T: FromStr>(&self, key: &str, what: &str) -> Result<Option<T>> {
        match self.get(key) {
            None => Ok(None),
            Some(v) => v.parse().map(Some).map_err(|_| CliError::config(key, format!("`{v}` is not {what}"))),
        }
    }

    pub fn f64_opt(&self, key: &str) -> Result<Option<f64>> {
        let v: Option<f64> = self.parsed(key, "a number")?;
        match v {
            Some(x) if !x.is_finite() => Err(CliError::config(key, "must be finite")),
            _ => Ok(v),
        }
    }

    pub fn f64(&self, key: &str) -> Result<f64> {
        self.f64_opt(key)?.ok_or_else(|| missing(key))
    }

    pub fn f64_or(&self, key: &str, default: f64) -> Result<f64> {
        Ok(self.f64_opt(key)?.unwrap_or(default))
    }

    pub fn usize(&self, key: &str) -> Result<usize> {
        self.parsed(key, "a non-negative integer")?.ok_or_else(|| missing(key))
    }

    pub fn usize_or(&self, key: &str, default: usize) -> Result<usize> {
        Ok(self.parsed(key, "a non-negative integer")?.unwrap_or(default))
    }

    pub fn i64_or(&self, key: &str, default: i64) -> Result<i64> {
        Ok(self.parsed(key, "an integer")?.unwrap_or(default))
    }

    pub fn bool_or(&self, key: &str, default: bool) -> Result<bool> {
        Ok(self.parsed(key, "true or false")?.unwrap_or(default))
    }

    /// Value restricted to `choices`, `default` when absent.
    pub fn choice_or<'a>(&'a self, key: &str, choices: &[&str], default: &'a str) -> Result<&'a str> {
        match self.get(key) {
            None => Ok(default),
            Some(v) if choices.contains(&v) => Ok(v),
            Some(v) => Err(CliError::config(key, format!("`{v}` not in {{{}}}", choices.join(", ")))),
        }
    }
}

fn missing(key: &str) -> CliError {
    CliError::config(key, "required key missing")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scale {
    Linear,
    Log,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub variable: String,
    pub start: f64,
    pub stop: f64,
    pub steps: usize,
    pub scale: Scale,
}

impl SweepSpec {
    pub fn new(variable: impl Into<String>, start: f64, stop: f64, steps: usize, scale: Scale) -> Result<Self> {
        if steps < 2 {
            return Err(CliError::config("steps", format!("need at least 2, got {steps}")));
        }
        if !(start < stop) {
            return Err(CliError::config("start", format!("start = {start} must be below stop = {stop}")));
        }
        if scale == Scale::Log && !(start > 0.0) {
            return Err(CliError::config("start", "log scale needs start > 0"));
        }
        Ok(Self { variable: variable.into(), start, stop, steps, scale })
    }

    /// Grid values; both endpoints are hit exactly.
    pub fn values(&self) -> Vec<f64> {
        let last = self.steps - 1;
        (0..self.steps)
            .map(|i| {
                if i == 0 {
                    return self.start;
                }
                if i == last {
                    return self.stop;
                }
                let u = i as f64 / last as f64;
                match self.scale {
                    Scale::Linear => self.start + u * (self.stop - self.start),
                    Scale::Log => (self.start.ln() + u * (self.stop.ln() - self.start.ln())).exp(),
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub experiment: Experiment,
    pub params: Params,
    /// `None` writes to stdout.
    pub output_path: Option<PathBuf>,
    pub format: OutputFormat,
    pub workers: usize,
    pub metadata: bool,
}

impl RunConfig {
    pub fn new(experiment: Experiment, params: Params) -> Self {
        Self { experiment, params, output_path: None, format: OutputFormat::Csv, workers: 1, metadata: true }
    }
}
