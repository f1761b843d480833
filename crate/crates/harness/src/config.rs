//! Flat key-value experiment configuration.
//!
//! Format: one `key = value` per line, `#` comments, lists comma-separated.
//! Exactly one of `d` / `T` may be a list (the sweep axis).
//!
//! Keys: name, d, T, distribution, schedule, replications, seed,
//! record_stride, output_dir, final_window.

use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub name: String,
    pub d: Vec<usize>,
    pub t: Vec<usize>,
    /// Built-in distribution name ("mixture-gaussian" | "gaussian-bernoulli").
    pub distribution: String,
    /// Registered schedule kind, e.g. "two-phase-practical" or "fixed:1e-4".
    pub schedule: String,
    pub replications: usize,
    pub seed: u64,
    /// 0 means the automatic stride max(1, T/2000).
    pub record_stride: usize,
    pub output_dir: PathBuf,
    /// Fraction of final iterates averaged into the summary error.
    pub final_window: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            name: "experiment".into(),
            d: vec![20],
            t: vec![1_000_000],
            distribution: "gaussian-bernoulli".into(),
            schedule: "two-phase-practical".into(),
            replications: 5,
            seed: 1,
            record_stride: 0,
            output_dir: PathBuf::from("out"),
            final_window: 0.6,
        }
    }
}

fn parse_list<T: std::str::FromStr>(value: &str, key: &str) -> Result<Vec<T>> {
    value
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<T>()
                .map_err(|_| Error::Config(format!("invalid {key} entry {:?}", s.trim())))
        })
        .collect()
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", lineno + 1)))?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "name" => cfg.name = value.to_string(),
                "d" => cfg.d = parse_list(value, "d")?,
                "T" => cfg.t = parse_list(value, "T")?,
                "distribution" => cfg.distribution = value.to_string(),
                "schedule" => cfg.schedule = value.to_string(),
                "replications" => {
                    cfg.replications = value
                        .parse()
                        .map_err(|_| Error::Config(format!("invalid replications {value:?}")))?
                }
                "seed" => {
                    cfg.seed = value
                        .parse()
                        .map_err(|_| Error::Config(format!("invalid seed {value:?}")))?
                }
                "record_stride" => {
                    cfg.record_stride = value
                        .parse()
                        .map_err(|_| Error::Config(format!("invalid record_stride {value:?}")))?
                }
                "output_dir" => cfg.output_dir = PathBuf::from(value),
                "final_window" => {
                    cfg.final_window = value
                        .parse()
                        .map_err(|_| Error::Config(format!("invalid final_window {value:?}")))?
                }
                other => {
                    return Err(Error::Config(format!("unknown key {other:?}")));
                }
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.d.is_empty() || self.t.is_empty() {
            return Err(Error::Config("d and T must be non-empty".into()));
        }
        if self.d.len() > 1 && self.t.len() > 1 {
            return Err(Error::Config(
                "at most one of d / T may be a list (sweeps vary one axis)".into(),
            ));
        }
        if self.replications < 1 {
            return Err(Error::Config("replications must be at least 1".into()));
        }
        if !(self.final_window > 0.0 && self.final_window <= 1.0) {
            return Err(Error::Config(format!(
                "final_window must lie in (0, 1], got {}",
                self.final_window
            )));
        }
        for &d in &self.d {
            if d < 2 {
                return Err(Error::Config(format!("dimension {d} below 2")));
            }
        }
        for &t in &self.t {
            if t < 1 {
                return Err(Error::Config("T must be at least 1".into()));
            }
        }
        Ok(())
    }

    /// Canonical serialization used for fingerprints and reproducibility.
    pub fn to_text(&self) -> String {
        let join = |xs: &[usize]| {
            xs.iter()
                .map(|x| x.to_string())
                .collect::<Vec<_>>()
                .join(",")
        };
        format!(
            "name = {}\nd = {}\nT = {}\ndistribution = {}\nschedule = {}\n\
             replications = {}\nseed = {}\nrecord_stride = {}\noutput_dir = {}\n\
             final_window = {}\n",
            self.name,
            join(&self.d),
            join(&self.t),
            self.distribution,
            self.schedule,
            self.replications,
            self.seed,
            self.record_stride,
            self.output_dir.display(),
            self.final_window,
        )
    }
}
