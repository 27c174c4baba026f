//! Closed-form regret and communication bounds, and pseudo-regret series.

use serde::Serialize;

use crate::env::Environment;
use crate::error::{Error, Result};
use crate::estimation::ThresholdSchedule;

/// Right-hand sides of the regret and communication bounds for one setting.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundReport {
    /// `8 (2a+1)^2 b^2 ln(1/delta) K / Delta^2`
    pub tau: f64,
    /// `sum_i 8 (2a+1)^2 b^2 ln(1/delta) / Delta_i`
    pub group_regret_term1: f64,
    pub individual_regret_term1: f64,
    /// `sum_i 6 M log_b(4 (2ab + b) / Delta_i) + M (K - 1)`
    pub comm_bound: f64,
    /// `K M^3 tau^2 T delta / 2`
    pub type2_term: f64,
}

/// `8 (2 alpha + 1)^2 beta^2 ln(1/delta)`.
fn pull_constant(sched: &ThresholdSchedule) -> f64 {
    let a = sched.alpha();
    let b = sched.beta();
    8.0 * (2.0 * a + 1.0).powi(2) * b * b * sched.ci_params().log_inv_delta()
}

pub fn theoretical_bounds(
    env: &Environment,
    sched: &ThresholdSchedule,
    horizon: u64,
) -> Result<BoundReport> {
    let min_gap = env.min_gap().ok_or_else(|| {
        Error::Input("all arm means are equal; the minimum gap is undefined".into())
    })?;
    let k = env.k() as f64;
    let m = sched.agents() as f64;
    let (a, b) = (sched.alpha(), sched.beta());
    let c = pull_constant(sched);
    let positive = || env.gaps().iter().copied().filter(|&g| g > 0.0);

    let tau = c * k / (min_gap * min_gap);
    let group_regret_term1: f64 = positive().map(|g| c / g).sum();
    let log_b = b.ln();
    let comm_bound = positive()
        .map(|g| 6.0 * m * ((4.0 * (2.0 * a * b + b) / g).ln() / log_b))
        .sum::<f64>()
        + m * (k - 1.0);
    let type2_term = k * m.powi(3) * tau * tau * horizon as f64 * sched.ci_params().delta() / 2.0;

    Ok(BoundReport {
        tau,
        group_regret_term1,
        individual_regret_term1: group_regret_term1 / m,
        comm_bound,
        type2_term,
    })
}

/// Largest system-wide pull count `M n(i)` a suboptimal arm can reach before
/// elimination while the optimal arm survives: `8 (2a+1)^2 b^2 ln(1/delta) / gap^2 + M`.
pub fn pull_bound(sched: &ThresholdSchedule, gap: f64) -> f64 {
    pull_constant(sched) / (gap * gap) + sched.agents() as f64
}

/// Cumulative pseudo-regret of one action sequence.
pub fn pseudo_regret_series(actions: &[usize], env: &Environment) -> Result<Vec<f64>> {
    let mut total = 0.0;
    actions
        .iter()
        .map(|&a| {
            if a >= env.k() {
                return Err(Error::Input(format!(
                    "action {a} out of range for K={}",
                    env.k()
                )));
            }
            total += env.gap(a);
            Ok(total)
        })
        .collect()
}
