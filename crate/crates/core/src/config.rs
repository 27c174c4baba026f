//! Experiment configuration and its flat `key = value` file format.
//!
//! ```text
//! # full-scale run
//! algorithm = doe_bandit
//! k = 100
//! m = 50
//! t_horizon = 30000
//! means_source = file(ctr_means.txt)
//! seed = 1
//! ```
//!
//! Optional keys and defaults: `alpha = 1`, `beta = 3`,
//! `delta_mode = inverse_t_squared` (or `fixed(<value>)`), `trials = 50`,
//! `record_every = max(1, t_horizon / 1000)`. `means_source` is either
//! `file(<path>)`, resolved relative to the config file, or
//! `synthetic(<top>, <gap>)`.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Serialize;

use crate::env::{load_means, synthetic_means, Environment};
use crate::error::{Error, Result};
use crate::estimation::{CiParams, ThresholdSchedule};
use crate::rng::{stream, Domain};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    DoeBandit,
    FullcommUcb,
    NocommUcb,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::DoeBandit => "doe_bandit",
            Algorithm::FullcommUcb => "fullcomm_ucb",
            Algorithm::NocommUcb => "nocomm_ucb",
        }
    }
}

impl FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "doe_bandit" => Ok(Algorithm::DoeBandit),
            "fullcomm_ucb" => Ok(Algorithm::FullcommUcb),
            "nocomm_ucb" => Ok(Algorithm::NocommUcb),
            _ => Err(format!(
                "unknown algorithm `{s}` (expected doe_bandit, fullcomm_ucb or nocomm_ucb)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MeansSource {
    File(PathBuf),
    Synthetic { top: f64, gap: f64 },
}

impl fmt::Display for MeansSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MeansSource::File(p) => write!(f, "file({})", p.display()),
            MeansSource::Synthetic { top, gap } => write!(f, "synthetic({top}, {gap})"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DeltaMode {
    Fixed(f64),
    InverseTSquared,
}

impl fmt::Display for DeltaMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DeltaMode::Fixed(v) => write!(f, "fixed({v})"),
            DeltaMode::InverseTSquared => f.write_str("inverse_t_squared"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub algorithm: Algorithm,
    pub k: usize,
    pub m: usize,
    pub t_horizon: u64,
    pub means_source: MeansSource,
    pub alpha: f64,
    pub beta: f64,
    pub delta_mode: DeltaMode,
    pub seed: u64,
    pub trials: usize,
    pub record_every: u64,
}

pub fn default_record_every(t_horizon: u64) -> u64 {
    (t_horizon / 1000).max(1)
}

impl ExperimentConfig {
    /// A config with the documented defaults for every optional key.
    pub fn new(
        algorithm: Algorithm,
        k: usize,
        m: usize,
        t_horizon: u64,
        means_source: MeansSource,
        seed: u64,
    ) -> Self {
        Self {
            algorithm,
            k,
            m,
            t_horizon,
            means_source,
            alpha: 1.0,
            beta: 3.0,
            delta_mode: DeltaMode::InverseTSquared,
            seed,
            trials: 50,
            record_every: default_record_every(t_horizon),
        }
    }

    /// Checks every field invariant; the first violation is reported by key.
    pub fn validate(&self) -> Result<()> {
        let bad = |key: &str, msg: &str| {
            Err(Error::Config {
                key: key.into(),
                line: 0,
                msg: msg.into(),
            })
        };
        if self.k < 1 {
            return bad("k", "k must be at least 1");
        }
        if self.m < 1 {
            return bad("m", "m must be at least 1");
        }
        if self.t_horizon < 1 {
            return bad("t_horizon", "t_horizon must be at least 1");
        }
        if self.trials < 1 {
            return bad("trials", "trials must be at least 1");
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return bad("alpha", "alpha must be positive");
        }
        if !(self.beta > 1.0 && self.beta.is_finite()) {
            return bad("beta", "beta must exceed 1");
        }
        if self.record_every < 1 {
            return bad("record_every", "record_every must be at least 1");
        }
        if let DeltaMode::Fixed(d) = self.delta_mode {
            if !(d > 0.0 && d <= 1.0) {
                return bad("delta_mode", "fixed delta must lie in (0, 1]");
            }
        }
        if let MeansSource::Synthetic { top, gap } = self.means_source {
            if self.k < 2 || !(gap > 0.0 && gap <= top && top <= 1.0) {
                return bad(
                    "means_source",
                    "synthetic means need k >= 2 and 0 < gap <= top <= 1",
                );
            }
        }
        Ok(())
    }

    pub fn delta(&self) -> f64 {
        match self.delta_mode {
            DeltaMode::Fixed(d) => d,
            DeltaMode::InverseTSquared => {
                let t = self.t_horizon as f64;
                1.0 / (t * t)
            }
        }
    }

    pub fn ci_params(&self) -> Result<CiParams> {
        CiParams::new(self.delta())
    }

    pub fn schedule(&self) -> Result<ThresholdSchedule> {
        ThresholdSchedule::new(self.alpha, self.beta, self.m, self.ci_params()?)
    }

    /// Builds the arm means. File sources draw their subset from a stream
    /// keyed by the seed alone, so every trial of a run sees the same arms.
    pub fn environment(&self) -> Result<Environment> {
        match &self.means_source {
            MeansSource::Synthetic { top, gap } => synthetic_means(self.k, *top, *gap),
            MeansSource::File(path) => {
                load_means(path, self.k, &mut stream(self.seed, Domain::Means, 0, 0))
            }
        }
    }

    /// Renders the config back into the key = value format.
    pub fn to_config_text(&self) -> String {
        format!(
            "algorithm = {}\nk = {}\nm = {}\nt_horizon = {}\nmeans_source = {}\nalpha = {}\nbeta = {}\ndelta_mode = {}\nseed = {}\ntrials = {}\nrecord_every = {}\n",
            self.algorithm.name(),
            self.k,
            self.m,
            self.t_horizon,
            self.means_source,
            self.alpha,
            self.beta,
            self.delta_mode,
            self.seed,
            self.trials,
            self.record_every,
        )
    }
}

const KEYS: [&str; 11] = [
    "algorithm",
    "k",
    "m",
    "t_horizon",
    "means_source",
    "alpha",
    "beta",
    "delta_mode",
    "seed",
    "trials",
    "record_every",
];
const REQUIRED: [&str; 6] = ["algorithm", "k", "m", "t_horizon", "means_source", "seed"];

pub fn parse_config(path: &Path) -> Result<ExperimentConfig> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let base = path.parent().unwrap_or_else(|| Path::new(""));
    parse_config_str(&text, base)
}

/// Parses config text; relative means-file paths are resolved against `base_dir`.
pub fn parse_config_str(text: &str, base_dir: &Path) -> Result<ExperimentConfig> {
    let mut entries: BTreeMap<&str, (usize, &str)> = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::Config {
                key: line.into(),
                line: lineno,
                msg: "expected `key = value`".into(),
            });
        };
        let key = key.trim();
        if !KEYS.contains(&key) {
            return Err(Error::Config {
                key: key.into(),
                line: lineno,
                msg: "unknown key".into(),
            });
        }
        if entries.insert(key, (lineno, value.trim())).is_some() {
            return Err(Error::Config {
                key: key.into(),
                line: lineno,
                msg: "duplicate key".into(),
            });
        }
    }
    for key in REQUIRED {
        if !entries.contains_key(key) {
            return Err(Error::Config {
                key: key.into(),
                line: 0,
                msg: "missing required key".into(),
            });
        }
    }

    let field = |key: &str| entries.get(key).copied();
    fn value<T: FromStr>(key: &str, (line, raw): (usize, &str)) -> Result<T> {
        raw.parse::<T>().map_err(|_| Error::Config {
            key: key.into(),
            line,
            msg: format!("cannot parse `{raw}`"),
        })
    }

    let algorithm = {
        let (line, raw) = field("algorithm").unwrap();
        raw.parse::<Algorithm>().map_err(|msg| Error::Config {
            key: "algorithm".into(),
            line,
            msg,
        })?
    };
    let k = value("k", field("k").unwrap())?;
    let m = value("m", field("m").unwrap())?;
    let t_horizon: u64 = value("t_horizon", field("t_horizon").unwrap())?;
    let seed = value("seed", field("seed").unwrap())?;
    let means_source = parse_means_source(field("means_source").unwrap(), base_dir)?;

    let mut cfg = ExperimentConfig::new(algorithm, k, m, t_horizon, means_source, seed);
    if let Some(f) = field("alpha") {
        cfg.alpha = value("alpha", f)?;
    }
    if let Some(f) = field("beta") {
        cfg.beta = value("beta", f)?;
    }
    if let Some(f) = field("trials") {
        cfg.trials = value("trials", f)?;
    }
    if let Some(f) = field("record_every") {
        cfg.record_every = value("record_every", f)?;
    }
    if let Some(f) = field("delta_mode") {
        cfg.delta_mode = parse_delta_mode(f)?;
    }

    cfg.validate().map_err(|e| match e {
        Error::Config { key, msg, .. } => {
            let line = entries.get(key.as_str()).map_or(0, |(l, _)| *l);
            Error::Config { key, line, msg }
        }
        other => other,
    })?;
    Ok(cfg)
}

/// `name(args)` -> `args`.
fn call_args<'a>(raw: &'a str, name: &str) -> Option<&'a str> {
    raw.strip_prefix(name)?
        .trim_start()
        .strip_prefix('(')?
        .strip_suffix(')')
        .map(str::trim)
}

fn parse_means_source((line, raw): (usize, &str), base_dir: &Path) -> Result<MeansSource> {
    let err = |msg: String| Error::Config {
        key: "means_source".into(),
        line,
        msg,
    };
    if let Some(path) = call_args(raw, "file") {
        if path.is_empty() {
            return Err(err("empty means file path".into()));
        }
        let p = Path::new(path);
        let resolved = if p.is_absolute() {
            p.to_path_buf()
        } else {
            base_dir.join(p)
        };
        return Ok(MeansSource::File(resolved));
    }
    if let Some(args) = call_args(raw, "synthetic") {
        let parts: Vec<&str> = args.split(',').map(str::trim).collect();
        if let [top, gap] = parts[..] {
            let top = top.parse().map_err(|_| err(format!("bad top `{top}`")))?;
            let gap = gap.parse().map_err(|_| err(format!("bad gap `{gap}`")))?;
            return Ok(MeansSource::Synthetic { top, gap });
        }
        return Err(err("synthetic(top, gap) takes two numbers".into()));
    }
    Err(err(format!(
        "expected file(<path>) or synthetic(<top>, <gap>), got `{raw}`"
    )))
}

fn parse_delta_mode((line, raw): (usize, &str)) -> Result<DeltaMode> {
    if raw == "inverse_t_squared" {
        return Ok(DeltaMode::InverseTSquared);
    }
    if let Some(v) = call_args(raw, "fixed") {
        if let Ok(d) = v.parse() {
            return Ok(DeltaMode::Fixed(d));
        }
    }
    Err(Error::Config {
        key: "delta_mode".into(),
        line,
        msg: format!("expected inverse_t_squared or fixed(<value>), got `{raw}`"),
    })
}
