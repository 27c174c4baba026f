//! Cooperative multi-agent multi-armed bandits with a distributed online
//! estimation (DoE) communication policy.
//!
//! The crate is organized bottom-up:
//!
//! - [`env`]: Bernoulli arms, means ingestion and reward sampling.
//! - [`rng`]: deterministic per-(trial, agent) random streams.
//! - [`estimation`]: the per-arm DoE estimator (confidence radius, threshold
//!   schedule, auxiliary/local estimates, detection points, sync).
//! - [`bandit`]: the elimination learner built on top of the estimator.
//! - [`engine`]: the synchronous slot loop, message accounting and events.
//! - [`baselines`]: full-communication and no-communication UCB comparators.
//! - [`bounds`]: closed-form regret/communication bounds and regret series.
//! - [`config`] and [`output`]: experiment configuration and CSV/JSON results.

pub mod bandit;
pub mod baselines;
pub mod bounds;
pub mod config;
pub mod engine;
pub mod env;
pub mod error;
pub mod estimation;
pub mod numeric;
pub mod output;
pub mod rng;

pub use bandit::{AgentState, CandidateSet};
pub use bounds::{theoretical_bounds, BoundReport};
pub use config::{Algorithm, DeltaMode, ExperimentConfig, MeansSource};
pub use engine::{
    run_trial, EliminationEvent, MessageCounter, SeriesPoint, SyncEvent, TrialResult,
};
pub use env::{ArmSpec, Environment};
pub use error::{Error, Result};
pub use estimation::{CiParams, DoeArmState, ThresholdSchedule};
pub use output::{run_experiment, write_outputs};
