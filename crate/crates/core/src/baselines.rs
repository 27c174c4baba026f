//! UCB comparators that bracket the elimination learner: one where every
//! reward is broadcast immediately, one where agents never talk.

use serde::Serialize;

use crate::config::{Algorithm, ExperimentConfig};
use crate::engine::{MessageCounter, Recorder, TrialResult};
use crate::env::Environment;
use crate::error::{Error, Result};
use crate::rng::{stream, Domain, Stream};

/// Exploration constant `c` in `sqrt(c ln t / n)`.
const EXPLORATION: f64 = 2.0;

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct UcbArmStat {
    pub pulls: u64,
    pub reward_sum: f64,
}

impl UcbArmStat {
    pub fn record(&mut self, reward: f64) {
        self.pulls += 1;
        self.reward_sum += reward;
    }
}

/// UCB1 index `mean + sqrt(2 ln t / n)`; `+inf` for an unpulled arm.
pub fn ucb_index(stat: &UcbArmStat, t: f64) -> f64 {
    debug_assert!(t >= 1.0);
    if stat.pulls == 0 {
        return f64::INFINITY;
    }
    let n = stat.pulls as f64;
    stat.reward_sum / n + (EXPLORATION * t.ln() / n).sqrt()
}

/// Arm with the largest index, lowest id on ties.
pub fn ucb_choose(stats: &[UcbArmStat], t: u64) -> usize {
    let mut best = 0;
    let mut best_index = f64::NEG_INFINITY;
    for (arm, s) in stats.iter().enumerate() {
        let idx = ucb_index(s, t as f64);
        if idx > best_index {
            best = arm;
            best_index = idx;
        }
    }
    best
}

fn check_env(config: &ExperimentConfig, env: &Environment) -> Result<()> {
    if env.k() != config.k {
        return Err(Error::Input(format!(
            "environment has {} arms, config says {}",
            env.k(),
            config.k
        )));
    }
    Ok(())
}

fn streams(config: &ExperimentConfig, trial: usize) -> Vec<Stream> {
    (0..config.m)
        .map(|j| stream(config.seed, Domain::Rewards, trial as u64, j as u64))
        .collect()
}

/// Broadcast-everything UCB, one slot at a time.
///
/// Every agent sees the pooled statistics of all agents, so all agents pick
/// the same arm; each then sends its reward to the `M - 1` others.
pub struct FullCommState {
    pub pooled: Vec<UcbArmStat>,
    pub local: Vec<Vec<UcbArmStat>>,
}

impl FullCommState {
    pub fn new(k: usize, m: usize) -> Self {
        Self {
            pooled: vec![UcbArmStat::default(); k],
            local: vec![vec![UcbArmStat::default(); k]; m],
        }
    }

    /// Arm every agent plays next; `t` is the pooled sample count (at least 1).
    pub fn choose(&self) -> usize {
        let total: u64 = self.pooled.iter().map(|s| s.pulls).sum();
        ucb_choose(&self.pooled, total.max(1))
    }

    pub fn record(&mut self, agent: usize, arm: usize, reward: f64) {
        self.local[agent][arm].record(reward);
        self.pooled[arm].record(reward);
    }
}

pub fn run_fullcomm_ucb(
    config: &ExperimentConfig,
    env: &Environment,
    trial: usize,
) -> Result<TrialResult> {
    check_env(config, env)?;
    let m = config.m;
    let mut rngs = streams(config, trial);
    let mut state = FullCommState::new(env.k(), m);
    let mut counter = MessageCounter::default();
    let mut recorder = Recorder::new(m, config.t_horizon, config.record_every, env);
    let per_slot = (m as u64) * (m as u64 - 1);

    for t in 1..=config.t_horizon {
        let arm = state.choose();
        for (j, rng) in rngs.iter_mut().enumerate() {
            let reward = env.draw_reward(arm, rng)?;
            recorder.pull(j, env.gap(arm), reward);
            state.record(j, arm, reward);
        }
        counter.charge_broadcast(per_slot);
        recorder.end_slot(t, false, counter.total, env.k());
    }

    Ok(finish(
        Algorithm::FullcommUcb,
        trial,
        env,
        recorder,
        counter,
        state.pooled.iter().map(|s| s.pulls).collect(),
    ))
}

/// Independent UCB1 per agent, no messages.
pub fn run_nocomm_ucb(
    config: &ExperimentConfig,
    env: &Environment,
    trial: usize,
) -> Result<TrialResult> {
    check_env(config, env)?;
    let m = config.m;
    let mut rngs = streams(config, trial);
    let mut stats = vec![vec![UcbArmStat::default(); env.k()]; m];
    let mut recorder = Recorder::new(m, config.t_horizon, config.record_every, env);

    for t in 1..=config.t_horizon {
        for (j, (own, rng)) in stats.iter_mut().zip(rngs.iter_mut()).enumerate() {
            let arm = ucb_choose(own, t);
            let reward = env.draw_reward(arm, rng)?;
            own[arm].record(reward);
            recorder.pull(j, env.gap(arm), reward);
        }
        recorder.end_slot(t, false, 0, env.k());
    }

    let pulls = (0..env.k())
        .map(|a| stats.iter().map(|s| s[a].pulls).sum())
        .collect();
    Ok(finish(
        Algorithm::NocommUcb,
        trial,
        env,
        recorder,
        MessageCounter::default(),
        pulls,
    ))
}

fn finish(
    algorithm: Algorithm,
    trial: usize,
    env: &Environment,
    recorder: Recorder,
    messages: MessageCounter,
    per_arm_pulls: Vec<u64>,
) -> TrialResult {
    TrialResult {
        trial,
        algorithm,
        individual_regrets: recorder.individual().to_vec(),
        realized_group_regret: recorder.realized(),
        series: recorder.series,
        sync_events: Vec::new(),
        elimination_events: Vec::new(),
        final_candidates: (0..env.k()).collect(),
        per_arm_pulls,
        optimal_survived: true,
        messages,
    }
}
