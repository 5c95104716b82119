use std::collections::BTreeMap;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use winners::distributions::GammaFitOptions;
use winners::empirical::load_panel;
use winners::gbm::{build_panel_with, EstimatorMode, PanelOptions, PricePath};

use crate::config::{named_inputs, parse_window, Settings};
use crate::report::{Record, Sink};
use crate::{Failure, Outcome};

const TRADING_DAY: f64 = 1.0 / 252.0;

#[derive(clap::Args, Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Args {
    /// Price file with columns `ticker,date,adj_close`. Repeat for several
    /// indexes; each is named by its file stem.
    #[arg(long, short)]
    pub input: Vec<PathBuf>,
    /// Keep observations dated within `START:END` (ISO dates).
    #[arg(long)]
    pub window: Option<String>,
    /// Years between consecutive observations [default: 1/252].
    #[arg(long)]
    pub dt: Option<f64>,
    /// Paths shorter than this fraction of the longest are treated as
    /// delisted and left out [default: 0.8].
    #[arg(long)]
    pub min_coverage: Option<f64>,
    /// Volatility from the demeaned sum of squares over T instead of the
    /// standard estimator.
    #[arg(long)]
    pub demeaned: bool,
    /// Upper bound on the fitted gamma rate.
    #[arg(long)]
    pub gamma_rate_cap: Option<f64>,
    /// Also write the per-ticker estimates.
    #[arg(long)]
    pub estimates: bool,
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
            dt: self.dt.or(file.dt),
            min_coverage: self.min_coverage.or(file.min_coverage),
            demeaned: self.demeaned || file.demeaned,
            gamma_rate_cap: self.gamma_rate_cap.or(file.gamma_rate_cap),
            estimates: self.estimates || file.estimates,
        }
    }
}

#[derive(Debug, Serialize)]
struct EstimateRow {
    index: String,
    ticker: String,
    mu_hat: f64,
    sigma_hat: f64,
    sigma_sq_raw: f64,
    clamped: bool,
}

pub fn run(args: Args, _settings: &Settings, sink: &mut Sink) -> Outcome {
    let inputs = named_inputs(&args.input)?;
    let window = args.window.as_deref().map(parse_window).transpose()?;
    let dt = args.dt.unwrap_or(TRADING_DAY);
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Failure::Input(format!("dt = {dt} must be positive")));
    }
    let defaults = PanelOptions::default();
    let opts = PanelOptions {
        mode: if args.demeaned {
            EstimatorMode::Demeaned
        } else {
            EstimatorMode::AsPrinted
        },
        min_coverage: args.min_coverage.unwrap_or(defaults.min_coverage),
        gamma: GammaFitOptions {
            rate_cap: args.gamma_rate_cap,
            ..defaults.gamma
        },
    };

    let mut rows = Vec::new();
    let mut estimates = Vec::new();
    let mut failed = Vec::new();
    let (mut clamped, mut total) = (0, 0);
    for (name, path) in &inputs {
        let in_file = |e: winners::Error| Failure::Input(format!("{}: {e}", path.display()));
        let (panel, _) = load_panel(path).map_err(in_file)?;
        let mut paths = BTreeMap::new();
        for (ticker, series) in &panel.series {
            let prices: Vec<f64> = series
                .iter()
                .filter(|(d, _)| window.is_none_or(|(a, b)| *d >= a && *d <= b))
                .map(|(_, p)| *p)
                .collect();
            if prices.len() < 2 {
                eprintln!("note: {name}: {ticker} has fewer than two prices in the window");
                continue;
            }
            paths.insert(ticker.clone(), PricePath::new(prices, dt).map_err(in_file)?);
        }
        let result = build_panel_with(&paths, &opts).map_err(in_file)?;
        for x in &result.excluded {
            eprintln!("note: {name}: {} excluded ({})", x.ticker, x.reason);
        }
        for (what, why) in result.failures() {
            failed.push(format!("{name}: {what}: {why}"));
        }
        clamped += result.stats.clamped;
        total += result.stats.n;
        rows.push(result.row(name));
        if args.estimates {
            estimates.extend(result.estimates.iter().map(|(t, e)| EstimateRow {
                index: name.clone(),
                ticker: t.clone(),
                mu_hat: e.mu_hat,
                sigma_hat: e.sigma_hat,
                sigma_sq_raw: e.sigma_sq_raw,
                clamped: e.clamped,
            }));
        }
    }

    let meta = Record::new("gbm")
        .with_opt("window", args.window.clone())
        .with("dt", dt)
        .with("estimator", if args.demeaned { "demeaned" } else { "standard" })
        .with("min_coverage", opts.min_coverage)
        .with_opt("gamma_rate_cap", args.gamma_rate_cap);
    let footer = Record::empty().with("clamped", clamped).with("estimates", total);
    sink.emit("panel", &meta, &rows, &footer)?;
    if args.estimates {
        sink.emit("estimates", &meta, &estimates, &footer)?;
    }
    Ok(failed)
}
