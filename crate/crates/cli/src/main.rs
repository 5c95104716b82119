//! `winners` — reproducible runs of the total-return analyses.
//!
//! Exit codes: 0 success, 2 input or parameter error, 3 a distribution fit
//! failed (everything else is still written).

mod analyze;
mod config;
mod gbm;
mod model;
mod regime;
mod report;

use std::process::ExitCode;

use clap::{CommandFactory, Parser, Subcommand};

use crate::config::{CommonArgs, ConfigFile, Settings};
use crate::report::Sink;

#[derive(Parser, Debug)]
#[command(
    name = "winners",
    version,
    about = "Return-distribution analyses of stock indexes"
)]
struct Cli {
    #[command(flatten)]
    common: CommonArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Total-return summary and left-tail-filtered log-normal fit per index.
    Analyze(analyze::Args),
    /// Typical N-stock mean against the true mean, analytic and simulated.
    Regime(regime::Args),
    /// Per-stock drift and volatility estimates and their cross-sectional fits.
    Gbm(gbm::Args),
    /// Closed-form under-performance ratios of the normal-drift index model.
    Model(model::Args),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Analyze(_) => "analyze",
            Command::Regime(_) => "regime",
            Command::Gbm(_) => "gbm",
            Command::Model(_) => "model",
        }
    }
}

#[derive(Debug)]
pub enum Failure {
    /// Bad input file, parameter or flag combination.
    Input(String),
    /// Required parameter missing; usage text of the subcommand follows.
    Usage(String),
}

impl From<winners::Error> for Failure {
    fn from(e: winners::Error) -> Self {
        Failure::Input(e.to_string())
    }
}

/// Result of a command that got as far as writing its reports: the fits
/// that failed along the way, if any.
pub type Outcome = Result<Vec<String>, Failure>;

fn run(cli: Cli) -> Outcome {
    let file = match &cli.common.config {
        Some(path) => ConfigFile::load(path)?,
        None => ConfigFile::default(),
    };
    let settings = Settings::resolve(&cli.common, &file);
    let mut sink = Sink::new(settings.out.clone(), settings.format);
    match cli.command {
        Command::Analyze(a) => analyze::run(a.overlay(file.analyze), &settings, &mut sink),
        Command::Regime(a) => regime::run(a.overlay(file.regime), &settings, &mut sink),
        Command::Gbm(a) => gbm::run(a.overlay(file.gbm), &settings, &mut sink),
        Command::Model(a) => model::run(a.overlay(file.model), &settings, &mut sink),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let command = cli.command.name();
    match run(cli) {
        Ok(failed) if failed.is_empty() => ExitCode::SUCCESS,
        Ok(failed) => {
            for f in failed {
                eprintln!("fit failed: {f}");
            }
            ExitCode::from(3)
        }
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Usage(msg)) => {
            let mut cmd = Cli::command();
            cmd.build();
            let usage = cmd
                .find_subcommand_mut(command)
                .map(|c| c.render_long_help().to_string())
                .unwrap_or_default();
            eprintln!("error: {msg}\n\n{usage}");
            ExitCode::from(2)
        }
    }
}
