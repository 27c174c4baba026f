//! Running every trial of a config and writing the CSV/JSON results.
//!
//! Layout of an output directory:
//!
//! - `trial_<idx>.csv`: header `slot,group_regret,max_individual_regret,messages,candidates`,
//!   one row per recorded slot, reals with six decimals, `\n` line endings.
//! - `summary.json`: config echo, per-trial finals, cross-trial mean and
//!   sample standard deviation, elimination slots, optimal-arm survival
//!   count and the bound report. Schema: `schema/summary.schema.json`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use crate::bounds::{theoretical_bounds, BoundReport};
use crate::config::ExperimentConfig;
use crate::engine::{run_trial_in, TrialResult};
use crate::env::Environment;
use crate::error::{Error, Result};
use crate::numeric::{mean, sample_stddev};

pub const CSV_HEADER: &str = "slot,group_regret,max_individual_regret,messages,candidates";

/// Environment variable capping trial parallelism; unset or 0 means all cores.
pub const THREADS_ENV: &str = "COOPBANDIT_THREADS";

/// Everything one run produces.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub config: ExperimentConfig,
    pub environment: Environment,
    pub trials: Vec<TrialResult>,
    /// `None` when all means are equal.
    pub bounds: Option<BoundReport>,
}

fn thread_cap() -> usize {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(0)
}

/// Runs all `config.trials` trials, in parallel, ordered by trial index.
pub fn run_experiment(config: &ExperimentConfig) -> Result<RunOutput> {
    config.validate()?;
    let environment = config.environment()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(thread_cap())
        .build()
        .map_err(|e| Error::Internal(format!("thread pool: {e}")))?;
    let trials = pool.install(|| {
        (0..config.trials)
            .into_par_iter()
            .map(|i| run_trial_in(config, &environment, i))
            .collect::<Result<Vec<_>>>()
    })?;
    let bounds = theoretical_bounds(&environment, &config.schedule()?, config.t_horizon).ok();
    Ok(RunOutput {
        config: config.clone(),
        environment,
        trials,
        bounds,
    })
}

pub fn trial_csv(result: &TrialResult) -> String {
    let mut out = String::with_capacity(64 * (result.series.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for p in &result.series {
        writeln!(
            out,
            "{},{:.6},{:.6},{},{}",
            p.slot, p.group_regret, p.max_individual_regret, p.messages, p.candidates
        )
        .unwrap();
    }
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct MeanStd {
    pub mean: f64,
    pub stddev: f64,
}

impl MeanStd {
    fn of(values: &[f64]) -> Self {
        Self {
            mean: mean(values),
            stddev: sample_stddev(values),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TrialSummary {
    pub trial: usize,
    pub group_regret: f64,
    pub max_individual_regret: f64,
    pub messages: u64,
    pub sync_messages: u64,
    pub elimination_messages: u64,
    pub sync_rounds: usize,
    pub realized_group_regret: f64,
    pub final_candidates: Vec<usize>,
    pub optimal_survived: bool,
    /// Arm id -> slot of its elimination.
    pub elimination_slots: BTreeMap<usize, u64>,
    pub per_arm_pulls: Vec<u64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Aggregate {
    pub group_regret: MeanStd,
    pub max_individual_regret: MeanStd,
    pub messages: MeanStd,
}

#[derive(Debug, Clone, Serialize)]
pub struct EnvironmentEcho {
    pub means: Vec<f64>,
    pub best_arm: usize,
    pub min_gap: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub config: ExperimentConfig,
    pub delta: f64,
    pub environment: EnvironmentEcho,
    pub trials: Vec<TrialSummary>,
    pub aggregate: Aggregate,
    pub optimal_survived: usize,
    pub bounds: Option<BoundReport>,
}

impl Summary {
    pub fn new(
        config: &ExperimentConfig,
        environment: &Environment,
        results: &[TrialResult],
        bounds: Option<BoundReport>,
    ) -> Self {
        let trials: Vec<TrialSummary> = results
            .iter()
            .map(|r| TrialSummary {
                trial: r.trial,
                group_regret: r.group_regret(),
                max_individual_regret: r.max_individual_regret(),
                messages: r.messages.total,
                sync_messages: r.messages.sync_messages,
                elimination_messages: r.messages.elimination_messages,
                sync_rounds: r.sync_events.len(),
                realized_group_regret: r.realized_group_regret,
                final_candidates: r.final_candidates.clone(),
                optimal_survived: r.optimal_survived,
                elimination_slots: r
                    .elimination_events
                    .iter()
                    .map(|e| (e.arm, e.slot))
                    .collect(),
                per_arm_pulls: r.per_arm_pulls.clone(),
            })
            .collect();
        let column = |f: fn(&TrialSummary) -> f64| trials.iter().map(f).collect::<Vec<_>>();
        let aggregate = Aggregate {
            group_regret: MeanStd::of(&column(|t| t.group_regret)),
            max_individual_regret: MeanStd::of(&column(|t| t.max_individual_regret)),
            messages: MeanStd::of(&column(|t| t.messages as f64)),
        };
        Self {
            config: config.clone(),
            delta: config.delta(),
            environment: EnvironmentEcho {
                means: environment.means().collect(),
                best_arm: environment.best_arm(),
                min_gap: environment.min_gap(),
            },
            optimal_survived: trials.iter().filter(|t| t.optimal_survived).count(),
            trials,
            aggregate,
            bounds,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }
}

/// Writes `trial_<idx>.csv` per trial and `summary.json` into `dir`.
pub fn write_outputs(output: &RunOutput, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    for r in &output.trials {
        let path = dir.join(format!("trial_{}.csv", r.trial));
        fs::write(&path, trial_csv(r)).map_err(|e| Error::io(&path, e))?;
    }
    let summary = Summary::new(
        &output.config,
        &output.environment,
        &output.trials,
        output.bounds,
    );
    let path = dir.join("summary.json");
    fs::write(&path, summary.to_json()?).map_err(|e| Error::io(&path, e))
}
