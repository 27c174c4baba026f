//! Synchronous slot loop for the elimination learner.
//!
//! One slot runs, in order: every agent pulls the same arm and draws its own
//! reward; every agent records the sample; a detection point on that arm
//! moves every watermark and, if any agent's auxiliary estimate strayed past
//! the threshold while more than one candidate remains, one sync round runs;
//! agents then test for eliminations in ascending id order, and the first
//! agent to flag an arm notifies everyone else before the slot ends.
//!
//! Message accounting: a sync round costs `3 (M - 1)` messages (trigger
//! broadcast, replies, result broadcast); an elimination notice costs
//! `M - 1`.

use serde::Serialize;

use crate::bandit::AgentState;
use crate::baselines;
use crate::config::{Algorithm, ExperimentConfig};
use crate::env::Environment;
use crate::error::{Error, Result};
use crate::estimation::{sync_if_needed, StepOutcome, ThresholdSchedule};
use crate::numeric::exact_sum;
use crate::rng::{stream, Domain, Stream};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct MessageCounter {
    pub sync_messages: u64,
    pub elimination_messages: u64,
    pub total: u64,
}

impl MessageCounter {
    pub fn charge_sync(&mut self, m: usize) {
        let c = 3 * (m as u64 - 1);
        self.sync_messages += c;
        self.total += c;
    }

    pub fn charge_elimination(&mut self, m: usize) {
        let c = m as u64 - 1;
        self.elimination_messages += c;
        self.total += c;
    }

    /// Raw charge, used by the broadcast baseline.
    pub fn charge_broadcast(&mut self, messages: u64) {
        self.sync_messages += messages;
        self.total += messages;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SyncEvent {
    pub slot: u64,
    pub arm: usize,
    pub trigger_agents: Vec<usize>,
    pub new_common_mean: f64,
    pub messages_charged: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EliminationEvent {
    pub slot: u64,
    pub arm: usize,
    pub by_agent: usize,
    pub messages_charged: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeriesPoint {
    pub slot: u64,
    pub group_regret: f64,
    pub max_individual_regret: f64,
    pub messages: u64,
    pub candidates: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialResult {
    pub trial: usize,
    pub algorithm: Algorithm,
    pub series: Vec<SeriesPoint>,
    pub sync_events: Vec<SyncEvent>,
    pub elimination_events: Vec<EliminationEvent>,
    pub final_candidates: Vec<usize>,
    /// Pulls of each arm summed over all agents (`M n(i)` for the elimination learner).
    pub per_arm_pulls: Vec<u64>,
    pub optimal_survived: bool,
    pub messages: MessageCounter,
    /// Final pseudo-regret of each agent.
    pub individual_regrets: Vec<f64>,
    /// `M t mu* - sum of realized rewards`, for reference.
    pub realized_group_regret: f64,
}

impl TrialResult {
    pub fn final_point(&self) -> SeriesPoint {
        *self
            .series
            .last()
            .expect("series always holds the last slot")
    }

    pub fn group_regret(&self) -> f64 {
        self.final_point().group_regret
    }

    pub fn max_individual_regret(&self) -> f64 {
        self.final_point().max_individual_regret
    }

    /// Slot at which `arm` was eliminated, if it was.
    pub fn elimination_slot(&self, arm: usize) -> Option<u64> {
        self.elimination_events
            .iter()
            .find(|e| e.arm == arm)
            .map(|e| e.slot)
    }
}

/// Hooks into the slot loop; every method defaults to a no-op.
pub trait TrialObserver {
    fn on_reward(&mut self, _slot: u64, _agent: usize, _arm: usize, _reward: f64) {}
    /// Called at every detection point, after a sync round if one ran.
    fn on_detection(&mut self, _slot: u64, _arm: usize, _agents: &[AgentState], _synced: bool) {}
    fn on_sync(&mut self, _event: &SyncEvent, _agents: &[AgentState]) {}
    fn on_elimination(&mut self, _event: &EliminationEvent, _agents: &[AgentState]) {}
}

pub struct NoopObserver;

impl TrialObserver for NoopObserver {}

/// Per-agent regret bookkeeping and series recording, shared with the baselines.
#[derive(Debug)]
pub(crate) struct Recorder {
    horizon: u64,
    record_every: u64,
    best_mean: f64,
    individual: Vec<f64>,
    realized: f64,
    pub series: Vec<SeriesPoint>,
}

impl Recorder {
    pub fn new(m: usize, horizon: u64, record_every: u64, env: &Environment) -> Self {
        Self {
            horizon,
            record_every: record_every.max(1),
            best_mean: env.best_mean(),
            individual: vec![0.0; m],
            realized: 0.0,
            series: Vec::new(),
        }
    }

    #[inline]
    pub fn pull(&mut self, agent: usize, gap: f64, reward: f64) {
        self.individual[agent] += gap;
        self.realized += self.best_mean - reward;
    }

    pub fn end_slot(&mut self, slot: u64, had_event: bool, messages: u64, candidates: usize) {
        if had_event || slot.is_multiple_of(self.record_every) || slot == self.horizon {
            self.series.push(SeriesPoint {
                slot,
                group_regret: exact_sum(self.individual.iter().copied()),
                max_individual_regret: self.individual.iter().copied().fold(0.0, f64::max),
                messages,
                candidates,
            });
        }
    }

    pub fn individual(&self) -> &[f64] {
        &self.individual
    }

    pub fn realized(&self) -> f64 {
        self.realized
    }
}

/// One trial of the elimination learner, advanced slot by slot.
pub struct DoeSimulation<'e> {
    env: &'e Environment,
    sched: ThresholdSchedule,
    agents: Vec<AgentState>,
    streams: Vec<Stream>,
    counter: MessageCounter,
    sync_events: Vec<SyncEvent>,
    elimination_events: Vec<EliminationEvent>,
    recorder: Recorder,
    rewards: Vec<f64>,
    trial: usize,
}

impl<'e> DoeSimulation<'e> {
    pub fn new(config: &ExperimentConfig, env: &'e Environment, trial: usize) -> Result<Self> {
        if env.k() != config.k {
            return Err(Error::Input(format!(
                "environment has {} arms, config says {}",
                env.k(),
                config.k
            )));
        }
        let sched = config.schedule()?;
        let m = config.m;
        Ok(Self {
            env,
            sched,
            agents: (0..m).map(|j| AgentState::new(j, env.k(), sched)).collect(),
            streams: (0..m)
                .map(|j| stream(config.seed, Domain::Rewards, trial as u64, j as u64))
                .collect(),
            counter: MessageCounter::default(),
            sync_events: Vec::new(),
            elimination_events: Vec::new(),
            recorder: Recorder::new(m, config.t_horizon, config.record_every, env),
            rewards: vec![0.0; m],
            trial,
        })
    }

    pub fn agents(&self) -> &[AgentState] {
        &self.agents
    }

    pub fn messages(&self) -> MessageCounter {
        self.counter
    }

    /// Runs slot `t` (1-based).
    pub fn run_slot<O: TrialObserver + ?Sized>(&mut self, t: u64, observer: &mut O) -> Result<()> {
        let m = self.agents.len();
        let reference = &self.agents[0].candidates;
        if self.agents.iter().any(|a| a.candidates != *reference) {
            return Err(Error::Internal(format!(
                "candidate sets diverged at slot {t}"
            )));
        }
        let events_before = self.sync_events.len() + self.elimination_events.len();

        // (1) synchronized pull, independent rewards
        let arm = self.agents[0].candidates.clone().select_arm();
        for j in 0..m {
            let picked = self.agents[j].candidates.select_arm();
            if picked != arm {
                return Err(Error::Internal(format!(
                    "agent {j} pulled {picked}, agent 0 pulled {arm} at slot {t}"
                )));
            }
            let reward = self.env.draw_reward(arm, &mut self.streams[j])?;
            self.rewards[j] = reward;
            self.recorder.pull(j, self.env.gap(arm), reward);
            observer.on_reward(t, j, arm, reward);
        }

        // (2) record the sample
        for (agent, &r) in self.agents.iter_mut().zip(&self.rewards) {
            agent.per_arm[arm].on_sample(r);
        }

        // (3) detection point and sync round
        let allow_sync = self.agents[0].candidates.len() >= 2;
        let outcome = {
            let mut states: Vec<_> = self
                .agents
                .iter_mut()
                .map(|a| &mut a.per_arm[arm])
                .collect();
            sync_if_needed(&mut states, &self.sched, allow_sync)?
        };
        match outcome {
            StepOutcome::Quiet => {}
            StepOutcome::Checked => observer.on_detection(t, arm, &self.agents, false),
            StepOutcome::Synced {
                trigger_agents,
                common_mean,
            } => {
                self.counter.charge_sync(m);
                let event = SyncEvent {
                    slot: t,
                    arm,
                    trigger_agents,
                    new_common_mean: common_mean,
                    messages_charged: 3 * (m as u64 - 1),
                };
                observer.on_sync(&event, &self.agents);
                observer.on_detection(t, arm, &self.agents, true);
                self.sync_events.push(event);
            }
        }

        // (4) estimates are read lazily from the updated sums.
        // (5) eliminations, first detector notifies
        for j in 0..m {
            for victim in self.agents[j].find_eliminations() {
                for agent in &mut self.agents {
                    agent.handle_elimination_notice(victim)?;
                }
                self.counter.charge_elimination(m);
                let event = EliminationEvent {
                    slot: t,
                    arm: victim,
                    by_agent: j,
                    messages_charged: m as u64 - 1,
                };
                observer.on_elimination(&event, &self.agents);
                self.elimination_events.push(event);
            }
        }

        // (6) metrics
        let had_event = self.sync_events.len() + self.elimination_events.len() > events_before;
        self.recorder.end_slot(
            t,
            had_event,
            self.counter.total,
            self.agents[0].candidates.len(),
        );
        Ok(())
    }

    pub fn finish(self) -> TrialResult {
        let m = self.agents.len() as u64;
        let lead = &self.agents[0];
        let final_candidates = lead.candidates.arms().to_vec();
        let optimal_survived = final_candidates.iter().any(|&a| self.env.gap(a) == 0.0);
        TrialResult {
            trial: self.trial,
            algorithm: Algorithm::DoeBandit,
            per_arm_pulls: lead.per_arm.iter().map(|s| m * s.n).collect(),
            final_candidates,
            optimal_survived,
            messages: self.counter,
            individual_regrets: self.recorder.individual().to_vec(),
            realized_group_regret: self.recorder.realized(),
            series: self.recorder.series,
            sync_events: self.sync_events,
            elimination_events: self.elimination_events,
        }
    }
}

/// Runs the elimination learner for `config.t_horizon` slots on `env`.
pub fn run_doe_trial<O: TrialObserver + ?Sized>(
    config: &ExperimentConfig,
    env: &Environment,
    trial: usize,
    observer: &mut O,
) -> Result<TrialResult> {
    let mut sim = DoeSimulation::new(config, env, trial)?;
    for t in 1..=config.t_horizon {
        sim.run_slot(t, observer)?;
    }
    Ok(sim.finish())
}

/// Runs one trial of the configured algorithm on a prepared environment.
pub fn run_trial_in(
    config: &ExperimentConfig,
    env: &Environment,
    trial: usize,
) -> Result<TrialResult> {
    config.validate()?;
    match config.algorithm {
        Algorithm::DoeBandit => run_doe_trial(config, env, trial, &mut NoopObserver),
        Algorithm::FullcommUcb => baselines::run_fullcomm_ucb(config, env, trial),
        Algorithm::NocommUcb => baselines::run_nocomm_ucb(config, env, trial),
    }
}

/// Deterministic function of `(config, trial)`.
pub fn run_trial(config: &ExperimentConfig, trial: usize) -> Result<TrialResult> {
    config.validate()?;
    let env = config.environment()?;
    run_trial_in(config, &env, trial)
}
