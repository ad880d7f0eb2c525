//! Experiment settings merged from a config file and command-line flags.
//!
//! The file format is one `key=value` per line. `#` starts a comment, blank
//! lines are ignored, and keys are the long flag names without dashes
//! (`ebn0-db=10`). Sweepable values accept
//!
//! * a single value: `n=12`
//! * a comma list: `p=1,2,3`
//! * an inclusive linear range `start:step:stop`: `ebn0-db=0:2:14`
//! * a log-spaced range `log:lo:hi:count`: `a=log:0.001:0.3:30`
//!
//! Later pairs override earlier ones, so flags win over the file.

use std::path::{Path, PathBuf};

use crate::dinkelbach::InnerMethod;
use crate::simulator::{Mode, NoiseModel};

use super::CliError;

/// Every key the grammar knows about.
pub const KEYS: &[&str] = &[
    "scenario", "m", "beta", "p", "ebn0-db", "n0", "n", "a", "b", "ct", "trials", "seed", "shards", "out", "json",
    "mode", "noise", "method", "confidence",
];

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ExperimentConfig {
    pub scenario: Option<String>,
    pub m: Option<Vec<usize>>,
    pub beta: Option<Vec<usize>>,
    pub p: Option<Vec<usize>>,
    pub ebn0_db: Option<Vec<f64>>,
    pub n0: Option<f64>,
    pub n: Option<Vec<usize>>,
    pub a: Option<Vec<f64>>,
    pub b: Option<Vec<f64>>,
    pub ct: Option<f64>,
    pub trials: Option<u64>,
    pub seed: Option<u64>,
    pub shards: Option<usize>,
    pub out: Option<PathBuf>,
    pub json: bool,
    pub mode: Option<Mode>,
    pub noise: Option<NoiseModel>,
    pub method: Option<InnerMethod>,
    pub confidence: Option<f64>,
}

impl ExperimentConfig {
    /// Applies `key=value` pairs in order.
    pub fn from_pairs<I, K, V>(pairs: I) -> Result<Self, CliError>
    where
        I: IntoIterator<Item = (K, V)>,
        K: AsRef<str>,
        V: AsRef<str>,
    {
        let mut cfg = ExperimentConfig::default();
        for (k, v) in pairs {
            cfg.set(k.as_ref(), v.as_ref())?;
        }
        Ok(cfg)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        let value = value.trim();
        match key {
            "scenario" => self.scenario = Some(value.to_string()),
            "m" => self.m = Some(int_sweep(key, value)?),
            "beta" => self.beta = Some(int_sweep(key, value)?),
            "p" => self.p = Some(int_sweep(key, value)?),
            "ebn0-db" => self.ebn0_db = Some(float_sweep(key, value)?),
            "n0" => self.n0 = Some(scalar(key, value)?),
            "n" => self.n = Some(int_sweep(key, value)?),
            "a" => self.a = Some(float_sweep(key, value)?),
            "b" => self.b = Some(float_sweep(key, value)?),
            "ct" => self.ct = Some(scalar(key, value)?),
            "trials" => self.trials = Some(scalar(key, value)?),
            "seed" => self.seed = Some(scalar(key, value)?),
            "shards" => self.shards = Some(scalar(key, value)?),
            "out" => self.out = Some(PathBuf::from(value)),
            "json" => {
                self.json = match value {
                    "" | "true" | "1" | "yes" => true,
                    "false" | "0" | "no" => false,
                    _ => return Err(usage(key, value, "expected true or false")),
                }
            }
            "mode" => {
                self.mode = Some(match value.to_ascii_lowercase().as_str() {
                    "sa" => Mode::Sa,
                    "psa" => Mode::Psa,
                    _ => return Err(usage(key, value, "expected sa or psa")),
                })
            }
            "noise" => {
                self.noise = Some(match value {
                    "complex" => NoiseModel::Complex,
                    "real" => NoiseModel::Real,
                    _ => return Err(usage(key, value, "expected complex or real")),
                })
            }
            "method" => {
                self.method = Some(match value {
                    "numeric" => InnerMethod::Numeric,
                    "kkt" | "kkt-verbatim" => InnerMethod::KktVerbatim,
                    _ => return Err(usage(key, value, "expected numeric or kkt-verbatim")),
                })
            }
            "confidence" => self.confidence = Some(scalar(key, value)?),
            _ => return Err(CliError::Usage(format!("unknown key '{key}'"))),
        }
        Ok(())
    }
}

fn usage(key: &str, value: &str, why: &str) -> CliError {
    CliError::Usage(format!("bad value '{value}' for {key}: {why}"))
}

/// Splits a config file into `(key, value)` pairs.
pub fn parse_config_text(text: &str) -> Result<Vec<(String, String)>, CliError> {
    let mut out = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(CliError::Usage(format!("config line {}: expected key=value", lineno + 1)));
        };
        let k = k.trim();
        if !KEYS.contains(&k) {
            return Err(CliError::Usage(format!("config line {}: unknown key '{k}'", lineno + 1)));
        }
        out.push((k.to_string(), v.trim().to_string()));
    }
    Ok(out)
}

pub fn read_config_file(path: &Path) -> Result<Vec<(String, String)>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("cannot read config {}: {e}", path.display())))?;
    parse_config_text(&text)
}

fn scalar<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, CliError> {
    value.parse().map_err(|_| usage(key, value, "not a number"))
}

fn nonempty<T>(key: &str, value: &str, v: Vec<T>) -> Result<Vec<T>, CliError> {
    if v.is_empty() {
        Err(usage(key, value, "sweep is empty"))
    } else {
        Ok(v)
    }
}

pub fn int_sweep(key: &str, value: &str) -> Result<Vec<usize>, CliError> {
    let mut out = Vec::new();
    for item in value.split(',').map(str::trim) {
        let parts: Vec<&str> = item.split(':').collect();
        match parts.as_slice() {
            [x] => out.push(scalar(key, x)?),
            [start, step, stop] => {
                let (start, step, stop): (usize, usize, usize) =
                    (scalar(key, start)?, scalar(key, step)?, scalar(key, stop)?);
                if step == 0 {
                    return Err(usage(key, value, "step must be positive"));
                }
                out.extend((start..=stop).step_by(step));
            }
            _ => return Err(usage(key, value, "expected n, a list, or start:step:stop")),
        }
    }
    nonempty(key, value, out)
}

pub fn float_sweep(key: &str, value: &str) -> Result<Vec<f64>, CliError> {
    let mut out = Vec::new();
    for item in value.split(',').map(str::trim) {
        let parts: Vec<&str> = item.split(':').collect();
        match parts.as_slice() {
            [x] => out.push(finite(key, value, scalar(key, x)?)?),
            [start, step, stop] => {
                let start = finite(key, value, scalar(key, start)?)?;
                let step = finite(key, value, scalar(key, step)?)?;
                let stop = finite(key, value, scalar(key, stop)?)?;
                if step <= 0.0 {
                    return Err(usage(key, value, "step must be positive"));
                }
                // Small slack so that 0:0.1:1 includes 1.
                let count = ((stop - start) / step + 1e-9).floor();
                if count >= 0.0 {
                    out.extend((0..=count as usize).map(|i| start + i as f64 * step));
                }
            }
            ["log", lo, hi, count] => {
                let lo = finite(key, value, scalar(key, lo)?)?;
                let hi = finite(key, value, scalar(key, hi)?)?;
                let count: usize = scalar(key, count)?;
                if !(lo > 0.0 && hi >= lo && count >= 1) {
                    return Err(usage(key, value, "log range needs 0 < lo <= hi and count >= 1"));
                }
                out.extend(log_space(lo, hi, count));
            }
            _ => return Err(usage(key, value, "expected x, a list, start:step:stop or log:lo:hi:count")),
        }
    }
    nonempty(key, value, out)
}

fn finite(key: &str, value: &str, x: f64) -> Result<f64, CliError> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(usage(key, value, "must be finite"))
    }
}

/// `count` log-spaced points from `lo` to `hi`, endpoints exact.
pub fn log_space(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![lo];
    }
    let span = (hi / lo).ln();
    (0..count)
        .map(|i| if i + 1 == count { hi } else { lo * (span * i as f64 / (count - 1) as f64).exp() })
        .collect()
}
