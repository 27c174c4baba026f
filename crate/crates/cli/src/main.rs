//! `coopbandit` command-line driver.
//!
//! ```text
//! coopbandit run    --config C --out DIR
//! coopbandit sweep  --config C --vary gap|m|k --values v1,v2,... --out DIR
//! coopbandit bounds --config C
//! ```

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use coopbandit_core::config::{parse_config, ExperimentConfig, MeansSource};
use coopbandit_core::{run_experiment, theoretical_bounds, write_outputs};

#[derive(Parser)]
#[command(
    name = "coopbandit",
    version,
    about = "Cooperative multi-agent bandit simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every trial of a config and write trial CSVs plus summary.json.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Repeat `run` once per value of one parameter, into `<out>/<param>=<value>/`.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_enum)]
        vary: SweepAxis,
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<String>,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Print the closed-form bounds for a config as JSON.
    Bounds {
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum SweepAxis {
    Gap,
    M,
    K,
}

impl SweepAxis {
    fn name(self) -> &'static str {
        match self {
            SweepAxis::Gap => "gap",
            SweepAxis::M => "m",
            SweepAxis::K => "k",
        }
    }

    fn apply(self, base: &ExperimentConfig, raw: &str) -> Result<ExperimentConfig> {
        let mut cfg = base.clone();
        match self {
            SweepAxis::Gap => {
                let gap: f64 = raw
                    .parse()
                    .with_context(|| format!("bad gap value `{raw}`"))?;
                match &mut cfg.means_source {
                    MeansSource::Synthetic { gap: g, .. } => *g = gap,
                    MeansSource::File(_) => {
                        bail!("--vary gap needs means_source = synthetic(top, gap)")
                    }
                }
            }
            SweepAxis::M => {
                cfg.m = raw
                    .parse()
                    .with_context(|| format!("bad m value `{raw}`"))?
            }
            SweepAxis::K => {
                cfg.k = raw
                    .parse()
                    .with_context(|| format!("bad k value `{raw}`"))?
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn load(path: &Path) -> Result<ExperimentConfig> {
    parse_config(path).with_context(|| format!("reading config {}", path.display()))
}

fn run_into(cfg: &ExperimentConfig, out: &Path) -> Result<()> {
    let output = run_experiment(cfg)?;
    write_outputs(&output, out)?;
    Ok(())
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run { config, out } => run_into(&load(&config)?, &out),
        Command::Sweep {
            config,
            vary,
            values,
            out,
        } => {
            let base = load(&config)?;
            // Validate every value before spending time on any run.
            let configs = values
                .iter()
                .map(|v| Ok((v.trim(), vary.apply(&base, v.trim())?)))
                .collect::<Result<Vec<_>>>()?;
            for (value, cfg) in configs {
                let dir = out.join(format!("{}={value}", vary.name()));
                run_into(&cfg, &dir)?;
                std::fs::write(dir.join("config.conf"), cfg.to_config_text())
                    .with_context(|| format!("writing {}", dir.display()))?;
            }
            Ok(())
        }
        Command::Bounds { config } => {
            let cfg = load(&config)?;
            let report = theoretical_bounds(&cfg.environment()?, &cfg.schedule()?, cfg.t_horizon)?;
            println!("{}", serde_json::to_string_pretty(&report)?);
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
