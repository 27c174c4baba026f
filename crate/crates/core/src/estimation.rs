//! Distributed online estimation of one arm's mean.
//!
//! Every agent keeps a [`DoeArmState`] per arm. Agents pull in lockstep, so
//! the per-agent sample count `n` is shared. The threshold schedule
//! `G_n = alpha * min(1, ci(M n, delta))` decides *when* agents look at their
//! deviation from the common mean (detection points, spaced so that `G`
//! shrinks by at least a factor `beta` between two of them), and the
//! deviation of the auxiliary local estimate decides *whether* a sync round
//! runs.
//!
//! Rewards are 0/1, so every reward sum is an integer held exactly in an
//! `f64`; division happens only when an estimate is read.

use serde::Serialize;

use crate::error::{Error, Result};

/// Confidence-radius parameters for a `[0, 1]`-valued process.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CiParams {
    delta: f64,
    log_inv_delta: f64,
}

impl CiParams {
    pub fn new(delta: f64) -> Result<Self> {
        if !(delta > 0.0 && delta <= 1.0) {
            return Err(Error::Input(format!(
                "delta must lie in (0, 1], got {delta}"
            )));
        }
        Ok(Self {
            delta,
            log_inv_delta: (1.0 / delta).ln(),
        })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// `ln(1/delta)`, natural log.
    pub fn log_inv_delta(&self) -> f64 {
        self.log_inv_delta
    }

    /// `sqrt(ln(1/delta) / (2n))`; `+inf` when `n = 0`.
    #[inline]
    pub fn radius(&self, n: u64) -> f64 {
        if n == 0 {
            return f64::INFINITY;
        }
        (self.log_inv_delta / (2.0 * n as f64)).sqrt()
    }
}

/// Confidence radius with `n` samples.
pub fn ci(n: u64, params: &CiParams) -> f64 {
    params.radius(n)
}

/// The deviation threshold `G_n` and its detection spacing `beta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThresholdSchedule {
    alpha: f64,
    beta: f64,
    m: usize,
    ci: CiParams,
}

impl ThresholdSchedule {
    pub fn new(alpha: f64, beta: f64, m: usize, ci: CiParams) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::Input(format!("alpha must be positive, got {alpha}")));
        }
        if !(beta > 1.0 && beta.is_finite()) {
            return Err(Error::Input(format!("beta must exceed 1, got {beta}")));
        }
        if m == 0 {
            return Err(Error::Input("need at least one agent".into()));
        }
        Ok(Self { alpha, beta, m, ci })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn agents(&self) -> usize {
        self.m
    }

    pub fn ci_params(&self) -> &CiParams {
        &self.ci
    }

    /// `G_n = alpha * min(1, ci(M n, delta))`.
    #[inline]
    pub fn threshold(&self, n: u64) -> f64 {
        self.alpha * self.ci.radius(self.m as u64 * n).min(1.0)
    }

    /// Half-width of the confidence interval around a local estimate:
    /// `(2 alpha beta + beta) * ci(M n, delta)`. Not clamped.
    #[inline]
    pub fn elimination_radius(&self, n: u64) -> f64 {
        (2.0 * self.alpha * self.beta + self.beta) * self.ci.radius(self.m as u64 * n)
    }
}

/// One agent's estimator for one arm.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DoeArmState {
    /// Samples of this arm held by each agent.
    pub n: u64,
    /// This agent's reward sum.
    pub x_own: f64,
    /// Every agent's reward sum at the last sync.
    pub x_last: Vec<f64>,
    pub n_last: u64,
    /// Common mean computed at the last sync (0 before any sync).
    pub mu_com: f64,
    /// Threshold watermark `G_last`.
    pub g_last: f64,
    pub has_synced: bool,
    sum_last: f64,
}

impl DoeArmState {
    pub fn new(sched: &ThresholdSchedule) -> Self {
        Self {
            n: 0,
            x_own: 0.0,
            x_last: vec![0.0; sched.agents()],
            n_last: 0,
            mu_com: 0.0,
            g_last: sched.threshold(1),
            has_synced: false,
            sum_last: 0.0,
        }
    }

    /// Builds a state from explicit fields; `g_last` and `mu_com` are taken as given.
    pub fn from_parts(n: u64, x_own: f64, x_last: Vec<f64>, n_last: u64, g_last: f64) -> Self {
        let sum_last: f64 = x_last.iter().sum();
        let mu_com = if n_last > 0 {
            sum_last / (x_last.len() as u64 * n_last) as f64
        } else {
            0.0
        };
        Self {
            n,
            x_own,
            x_last,
            n_last,
            mu_com,
            g_last,
            has_synced: n_last > 0,
            sum_last,
        }
    }

    fn m(&self) -> u64 {
        self.x_last.len() as u64
    }

    /// Sum of every agent's reward sum at the last sync.
    pub fn synced_sum(&self) -> f64 {
        self.sum_last
    }

    /// Auxiliary local estimate: peers' missing samples since the last sync are
    /// stood in for by this agent's own new samples.
    pub fn ale(&self, agent: usize) -> f64 {
        debug_assert!(self.n >= 1);
        let m = self.m();
        let fresh = self.x_own - self.x_last[agent];
        (self.sum_last + m as f64 * fresh) / (m * self.n) as f64
    }

    /// Local estimate used for elimination: all synced samples plus this
    /// agent's own samples since the sync.
    pub fn local_estimate(&self, agent: usize) -> f64 {
        debug_assert!(self.n >= 1);
        let fresh = self.x_own - self.x_last[agent];
        (self.sum_last + fresh) / (self.m() * self.n_last + self.n - self.n_last) as f64
    }

    pub fn on_sample(&mut self, reward: f64) {
        debug_assert!(
            reward == 0.0 || reward == 1.0,
            "non-Bernoulli reward {reward}"
        );
        self.n += 1;
        self.x_own += reward;
    }

    /// `beta * G_n <= G_last`.
    pub fn at_detection_point(&self, sched: &ThresholdSchedule) -> bool {
        self.n >= 1 && sched.beta() * sched.threshold(self.n) <= self.g_last
    }

    /// Moves the watermark to `G_n`; called once a detection point is reached.
    pub fn accept_watermark(&mut self, sched: &ThresholdSchedule) {
        self.g_last = sched.threshold(self.n);
    }

    /// `|ale - mu_com| > G_n`.
    pub fn wants_sync(&self, agent: usize, sched: &ThresholdSchedule) -> bool {
        (self.ale(agent) - self.mu_com).abs() > sched.threshold(self.n)
    }

    /// Installs the reward sums collected in a sync round.
    pub fn apply_sync(&mut self, all_sums: &[f64]) -> Result<()> {
        if all_sums.len() != self.x_last.len() {
            return Err(Error::Internal(format!(
                "sync carried {} sums for {} agents",
                all_sums.len(),
                self.x_last.len()
            )));
        }
        self.x_last.copy_from_slice(all_sums);
        self.sum_last = all_sums.iter().sum();
        self.n_last = self.n;
        self.mu_com = self.sum_last / (self.m() * self.n) as f64;
        self.has_synced = true;
        Ok(())
    }
}

/// What happened to an arm when every agent received one new sample.
#[derive(Debug, Clone, PartialEq)]
pub enum StepOutcome {
    Quiet,
    /// Detection point where every agent stayed within the threshold.
    Checked,
    /// Detection point that triggered a sync round.
    Synced {
        trigger_agents: Vec<usize>,
        common_mean: f64,
    },
}

/// M agents running the estimator on a single arm, in lockstep.
#[derive(Debug, Clone)]
pub struct DoeGroup {
    sched: ThresholdSchedule,
    states: Vec<DoeArmState>,
}

impl DoeGroup {
    pub fn new(sched: ThresholdSchedule) -> Self {
        let states = (0..sched.agents())
            .map(|_| DoeArmState::new(&sched))
            .collect();
        Self { sched, states }
    }

    pub fn states(&self) -> &[DoeArmState] {
        &self.states
    }

    pub fn schedule(&self) -> &ThresholdSchedule {
        &self.sched
    }

    /// Feeds one reward per agent. `allow_sync = false` suppresses sync rounds
    /// (the bandit learner does this once a single candidate remains).
    pub fn step(&mut self, rewards: &[f64], allow_sync: bool) -> Result<StepOutcome> {
        if rewards.len() != self.states.len() {
            return Err(Error::Internal(format!(
                "{} rewards for {} agents",
                rewards.len(),
                self.states.len()
            )));
        }
        for (state, &r) in self.states.iter_mut().zip(rewards) {
            state.on_sample(r);
        }
        sync_if_needed(
            &mut self.states.iter_mut().collect::<Vec<_>>(),
            &self.sched,
            allow_sync,
        )
    }
}

/// Detection and sync logic over one arm's states, indexed by agent id.
pub(crate) fn sync_if_needed(
    states: &mut [&mut DoeArmState],
    sched: &ThresholdSchedule,
    allow_sync: bool,
) -> Result<StepOutcome> {
    // n is shared, so the detection verdict is the same for every agent.
    if !states[0].at_detection_point(sched) {
        return Ok(StepOutcome::Quiet);
    }
    for s in states.iter_mut() {
        s.accept_watermark(sched);
    }
    let trigger_agents: Vec<usize> = states
        .iter()
        .enumerate()
        .filter(|(j, s)| s.wants_sync(*j, sched))
        .map(|(j, _)| j)
        .collect();
    if !allow_sync || trigger_agents.is_empty() {
        return Ok(StepOutcome::Checked);
    }
    let sums: Vec<f64> = states.iter().map(|s| s.x_own).collect();
    for s in states.iter_mut() {
        s.apply_sync(&sums)?;
    }
    Ok(StepOutcome::Synced {
        trigger_agents,
        common_mean: states[0].mu_com,
    })
}
