//! Command-line front end: parses an experiment config, runs it on a
//! sized thread pool and writes CSV.

pub mod commands;
pub mod config;
pub mod output;
pub mod validate;

use std::io::Write;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use commands::{run_task, Task};
use config::{ExperimentConfig, Overrides};
use validate::Fault;

#[derive(Debug, Parser)]
#[command(
    name = "brochette",
    version,
    about = "Monte Carlo experiments on percolation with random columns"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Estimate the probability of one event.
    Estimate(Overrides),
    /// Estimate an event along a grid of p, q, rho or n.
    Sweep(Overrides),
    /// Correlation length L(p, epsilon) from hard crossings.
    Length(Overrides),
    /// Pivotal sums for the annulus circuit event.
    Russo(Overrides),
    /// Block-field checks for the renormalization.
    Renorm(Overrides),
    /// Survival curve of the oriented site model.
    Oriented(Overrides),
    /// Compare the fast detectors against brute-force references.
    Validate {
        #[arg(long, value_enum)]
        inject_fault: Option<Fault>,
    },
    /// Print the resolved config as JSON.
    Config(Overrides),
}

/// Run `task` on a pool of `cfg.workers` threads and write its CSV.
pub fn execute(task: Task, cfg: &ExperimentConfig) -> Result<()> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .context("building thread pool")?;
    let rows = pool.install(|| run_task(task, cfg))?;
    output::write_csv(&rows, cfg.out.as_deref())
}

pub fn dispatch(command: Command) -> Result<ExitCode> {
    let (task, o) = match command {
        Command::Validate { inject_fault } => {
            let results = validate::run_suite(inject_fault)?;
            let mut out = std::io::stdout().lock();
            for r in &results {
                writeln!(out, "{r}")?;
            }
            let ok = results.iter().all(|r| r.passed);
            return Ok(if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            });
        }
        Command::Config(o) => {
            writeln!(std::io::stdout().lock(), "{}", o.resolve()?.to_json())?;
            return Ok(ExitCode::SUCCESS);
        }
        Command::Estimate(o) => (Task::Estimate, o),
        Command::Sweep(o) => (Task::Sweep, o),
        Command::Length(o) => (Task::Length, o),
        Command::Russo(o) => (Task::Russo, o),
        Command::Renorm(o) => (Task::Renorm, o),
        Command::Oriented(o) => (Task::Oriented, o),
    };
    execute(task, &o.resolve()?)?;
    Ok(ExitCode::SUCCESS)
}
