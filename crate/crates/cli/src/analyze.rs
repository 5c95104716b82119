use std::path::PathBuf;

use serde::Deserialize;
use winners::empirical::{
    fit_macroscopic, load_panel, summarize_index_with, tail_filter, total_returns, total_returns_in, FitRow,
    SummaryRow, DEFAULT_TAIL_THRESHOLD, ENDPOINT_TOLERANCE_DAYS,
};
use winners::kde::KdeOptions;

use crate::config::{named_inputs, parse_window, Settings};
use crate::report::{Record, Sink};
use crate::{Failure, Outcome};

#[derive(clap::Args, Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Args {
    /// Price file with columns `ticker,date,adj_close`. Repeat for several
    /// indexes; each is named by its file stem.
    #[arg(long, short)]
    pub input: Vec<PathBuf>,
    /// Window `START:END` (ISO dates); defaults to the span of each file.
    #[arg(long)]
    pub window: Option<String>,
    /// Keep returns with `ln ρ` strictly above this before fitting [default: -2].
    #[arg(long, allow_hyphen_values = true)]
    pub tail_threshold: Option<f64>,
    /// Fixed kernel bandwidth for the mode (default: Scott's rule).
    #[arg(long)]
    pub bandwidth: Option<f64>,
    /// Multiplier applied to the bandwidth.
    #[arg(long)]
    pub bandwidth_scale: Option<f64>,
    /// Locate the mode through the density of `ln ρ`.
    #[arg(long)]
    pub log_kde: bool,
}

impl Args {
    pub fn overlay(self, file: Args) -> Args {
        Args {
            input: if self.input.is_empty() {
                file.input
            } else {
                self.input
            },
            window: self.window.or(file.window),
            tail_threshold: self.tail_threshold.or(file.tail_threshold),
            bandwidth: self.bandwidth.or(file.bandwidth),
            bandwidth_scale: self.bandwidth_scale.or(file.bandwidth_scale),
            log_kde: self.log_kde || file.log_kde,
        }
    }
}

pub fn run(args: Args, _settings: &Settings, sink: &mut Sink) -> Outcome {
    let inputs = named_inputs(&args.input)?;
    let window = args.window.as_deref().map(parse_window).transpose()?;
    let threshold = args.tail_threshold.unwrap_or(DEFAULT_TAIL_THRESHOLD);
    if !threshold.is_finite() {
        return Err(Failure::Input(format!(
            "tail threshold {threshold} is not finite"
        )));
    }
    let kde = KdeOptions {
        bandwidth: args.bandwidth,
        bandwidth_scale: args.bandwidth_scale.unwrap_or(1.0),
        log_space: args.log_kde,
        ..KdeOptions::default()
    };

    let mut summaries = Vec::new();
    let mut fits = Vec::new();
    let mut failed = Vec::new();
    for (name, path) in &inputs {
        let in_file = |e: winners::Error| Failure::Input(format!("{}: {e}", path.display()));
        let (panel, report) = load_panel(path).map_err(in_file)?;
        for t in &report.resorted {
            eprintln!("note: {name}: dates of {t} were out of order and have been sorted");
        }
        let returns = match window {
            Some(w) => total_returns_in(&panel, w, ENDPOINT_TOLERANCE_DAYS),
            None => total_returns(&panel),
        }
        .map_err(in_file)?;
        for d in &returns.disqualified {
            eprintln!("note: {name}: {} excluded ({})", d.ticker, d.reason);
        }
        let summary = summarize_index_with(&returns.sample, &kde).map_err(in_file)?;
        if let Some(why) = &summary.mode_note {
            eprintln!("note: {name}: mode omitted ({why})");
        }
        summaries.push(SummaryRow::new(name, &summary));

        let filtered = tail_filter(&returns.sample, threshold);
        match fit_macroscopic(&filtered.sample) {
            Ok(f) => fits.push(FitRow::new(name, &filtered, &f)),
            Err(e) => failed.push(format!("{name}: log-normal fit: {e}")),
        }
    }

    let meta = Record::new("analyze")
        .with_opt("window", args.window.clone())
        .with("tail_threshold", threshold)
        .with_opt("bandwidth", args.bandwidth)
        .with_opt("bandwidth_scale", args.bandwidth_scale)
        .with("log_kde", args.log_kde);
    sink.emit("summary", &meta, &summaries, &Record::empty())?;
    sink.emit("fits", &meta, &fits, &Record::empty())?;
    Ok(failed)
}
