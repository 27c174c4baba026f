//! Bandit environment: Bernoulli arms and their means.

use std::fs;
use std::path::Path;

use rand::seq::index;
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ArmSpec {
    pub index: usize,
    pub mean: f64,
}

/// A set of K Bernoulli arms with precomputed gaps.
///
/// Ties for the best arm are broken by the lowest index.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Environment {
    arms: Vec<ArmSpec>,
    best_arm: usize,
    gaps: Vec<f64>,
    min_gap: Option<f64>,
}

impl Environment {
    pub fn from_means(means: &[f64]) -> Result<Self> {
        if means.is_empty() {
            return Err(Error::Input("environment needs at least one arm".into()));
        }
        if let Some((i, m)) = means
            .iter()
            .enumerate()
            .find(|(_, m)| !(0.0..=1.0).contains(*m))
        {
            return Err(Error::Input(format!(
                "mean of arm {i} is {m}, outside [0, 1]"
            )));
        }
        let mut best_arm = 0;
        for (i, &m) in means.iter().enumerate() {
            if m > means[best_arm] {
                best_arm = i;
            }
        }
        let top = means[best_arm];
        let gaps: Vec<f64> = means.iter().map(|&m| top - m).collect();
        let min_gap = gaps
            .iter()
            .copied()
            .filter(|&g| g > 0.0)
            .min_by(f64::total_cmp);
        let arms = means
            .iter()
            .enumerate()
            .map(|(index, &mean)| ArmSpec { index, mean })
            .collect();
        Ok(Self {
            arms,
            best_arm,
            gaps,
            min_gap,
        })
    }

    pub fn k(&self) -> usize {
        self.arms.len()
    }

    pub fn arms(&self) -> &[ArmSpec] {
        &self.arms
    }

    pub fn means(&self) -> impl Iterator<Item = f64> + '_ {
        self.arms.iter().map(|a| a.mean)
    }

    pub fn mean(&self, arm: usize) -> f64 {
        self.arms[arm].mean
    }

    pub fn best_arm(&self) -> usize {
        self.best_arm
    }

    pub fn best_mean(&self) -> f64 {
        self.arms[self.best_arm].mean
    }

    /// `gaps()[i] = max mean - mean(i)`.
    pub fn gaps(&self) -> &[f64] {
        &self.gaps
    }

    pub fn gap(&self, arm: usize) -> f64 {
        self.gaps[arm]
    }

    /// Smallest strictly positive gap; `None` when all means are equal.
    pub fn min_gap(&self) -> Option<f64> {
        self.min_gap
    }

    /// Draws one Bernoulli reward from `arm`, consuming exactly one `f64` from `rng`.
    pub fn draw_reward<R: Rng + ?Sized>(&self, arm: usize, rng: &mut R) -> Result<f64> {
        let spec = self
            .arms
            .get(arm)
            .ok_or_else(|| Error::Input(format!("arm {arm} out of range for K={}", self.k())))?;
        Ok(bernoulli(spec.mean, rng))
    }
}

#[inline]
pub(crate) fn bernoulli<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> f64 {
    // u is uniform on [0, 1), so mean = 1 always pays and mean = 0 never does.
    let u: f64 = rng.gen();
    if u < mean {
        1.0
    } else {
        0.0
    }
}

/// `[top, top - gap, ..., top - gap]` with K entries.
pub fn synthetic_means(k: usize, top: f64, gap: f64) -> Result<Environment> {
    if k < 2 {
        return Err(Error::Input(format!(
            "synthetic means need k >= 2, got {k}"
        )));
    }
    if !(gap > 0.0 && gap <= top && top <= 1.0) {
        return Err(Error::Input(format!(
            "synthetic means need 0 < gap <= top <= 1, got top={top}, gap={gap}"
        )));
    }
    let mut means = vec![top - gap; k];
    means[0] = top;
    Environment::from_means(&means)
}

/// Parses a means file: one real in [0, 1] per line, blank lines and `#` comments skipped.
pub fn parse_means_file(path: &Path) -> Result<Vec<f64>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut values = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let parse_err = |msg: String| Error::Parse {
            path: path.to_path_buf(),
            line: lineno + 1,
            msg,
        };
        let v: f64 = line
            .parse()
            .map_err(|_| parse_err(format!("`{line}` is not a number")))?;
        if !(0.0..=1.0).contains(&v) {
            return Err(parse_err(format!("mean {v} outside [0, 1]")));
        }
        values.push(v);
    }
    Ok(values)
}

/// Picks `k` means uniformly without replacement from a means file.
///
/// The chosen values keep their file order, so a file with exactly `k`
/// values yields those values unchanged.
pub fn load_means<R: Rng + ?Sized>(path: &Path, k: usize, rng: &mut R) -> Result<Environment> {
    let values = parse_means_file(path)?;
    select_means(&values, k, rng)
}

pub(crate) fn select_means<R: Rng + ?Sized>(
    values: &[f64],
    k: usize,
    rng: &mut R,
) -> Result<Environment> {
    if k == 0 || values.len() < k {
        return Err(Error::Input(format!(
            "means source has {} valid values, need {k}",
            values.len()
        )));
    }
    let mut picked = index::sample(rng, values.len(), k).into_vec();
    picked.sort_unstable();
    let means: Vec<f64> = picked.into_iter().map(|i| values[i]).collect();
    Environment::from_means(&means)
}
