use std::path::{Path, PathBuf};

use serde::Deserialize;
use winners::distributions::LogNormalParams;
use winners::lognormal_sum::{regime_curve_with, McOptions, RegimeThresholds};

use crate::config::Settings;
use crate::report::{Record, Sink};
use crate::{Failure, Outcome};

#[derive(clap::Args, Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Args {
    /// Log-mean of single-stock returns; the ratios do not depend on it [default: 0].
    #[arg(long, allow_hyphen_values = true)]
    pub mu: Option<f64>,
    /// Log-standard deviation of single-stock returns.
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Fit table written by `analyze` to take (μ, σ) from.
    #[arg(long)]
    pub params: Option<PathBuf>,
    /// Row of the fit table to use; needed when it holds several indexes.
    #[arg(long)]
    pub index: Option<String>,
    /// Portfolio sizes, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub grid: Vec<u64>,
    /// Without --grid, powers of two up to this size [default: 1024].
    #[arg(long)]
    pub max_n: Option<u64>,
    /// Largest σ² treated as narrow [default: 0.1].
    #[arg(long)]
    pub narrow_max: Option<f64>,
    /// Smallest σ² treated as very broad [default: 4].
    #[arg(long)]
    pub very_broad_min: Option<f64>,
    /// Bootstrap resamples for the standard error of each simulated mode [default: 100].
    #[arg(long)]
    pub bootstrap_reps: Option<usize>,
    /// Kernel bandwidth multiplier for the simulated modes.
    #[arg(long)]
    pub bandwidth_scale: Option<f64>,
}

impl Args {
    pub fn overlay(self, file: Args) -> Args {
        Args {
            mu: self.mu.or(file.mu),
            sigma: self.sigma.or(file.sigma),
            params: self.params.or(file.params),
            index: self.index.or(file.index),
            grid: if self.grid.is_empty() {
                file.grid
            } else {
                self.grid
            },
            max_n: self.max_n.or(file.max_n),
            narrow_max: self.narrow_max.or(file.narrow_max),
            very_broad_min: self.very_broad_min.or(file.very_broad_min),
            bootstrap_reps: self.bootstrap_reps.or(file.bootstrap_reps),
            bandwidth_scale: self.bandwidth_scale.or(file.bandwidth_scale),
        }
    }
}

#[derive(Debug, Deserialize)]
struct FitEntry {
    index: String,
    mu: f64,
    sigma: f64,
}

fn from_fit_table(path: &Path, index: Option<&str>) -> Result<(String, f64, f64), Failure> {
    let bad = |why: String| Failure::Input(format!("{}: {why}", path.display()));
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(|e| bad(e.to_string()))?;
    let rows: Vec<FitEntry> = rdr
        .deserialize()
        .collect::<Result<_, _>>()
        .map_err(|e| bad(e.to_string()))?;
    let row = match index {
        Some(name) => rows
            .into_iter()
            .find(|r| r.index == name)
            .ok_or_else(|| bad(format!("no row for `{name}`")))?,
        None if rows.len() == 1 => rows.into_iter().next().unwrap(),
        None => {
            return Err(Failure::Usage(format!(
                "{} holds {} indexes; pick one with --index",
                path.display(),
                rows.len()
            )))
        }
    };
    Ok((row.index, row.mu, row.sigma))
}

pub fn run(args: Args, settings: &Settings, sink: &mut Sink) -> Outcome {
    let (label, mu, sigma) = match (&args.params, args.sigma) {
        (Some(path), None) => {
            let (name, mu, sigma) = from_fit_table(path, args.index.as_deref())?;
            (Some(name), mu, sigma)
        }
        (None, Some(sigma)) => (None, args.mu.unwrap_or(0.0), sigma),
        (Some(_), Some(_)) => return Err(Failure::Usage("give either --sigma or --params, not both".into())),
        (None, None) => {
            return Err(Failure::Usage(
                "missing log-normal parameters: give --sigma or --params".into(),
            ))
        }
    };
    let p = LogNormalParams::new(mu, sigma)?;

    let mut grid = if args.grid.is_empty() {
        let max_n = args.max_n.unwrap_or(1024);
        std::iter::successors(Some(1u64), |n| n.checked_mul(2))
            .take_while(|n| *n <= max_n)
            .collect()
    } else {
        args.grid.clone()
    };
    grid.sort_unstable();
    grid.dedup();

    let defaults = RegimeThresholds::default();
    let thresholds = RegimeThresholds {
        narrow_max: args.narrow_max.unwrap_or(defaults.narrow_max),
        very_broad_min: args.very_broad_min.unwrap_or(defaults.very_broad_min),
    };
    thresholds.validate()?;

    let reps = settings.reps.unwrap_or(0);
    let seed = if reps > 0 {
        Some(settings.require_seed()?)
    } else {
        settings.seed
    };
    let mut mc = McOptions {
        reps,
        seed: seed.unwrap_or(0),
        ..McOptions::default()
    };
    if let Some(b) = args.bootstrap_reps {
        mc.bootstrap_reps = b;
    }
    if let Some(s) = args.bandwidth_scale {
        mc.kde.bandwidth_scale = s;
    }

    let curve = regime_curve_with(&p, &grid, &thresholds, &mc)?;
    let meta = Record::new("regime")
        .with_opt("index", label)
        .with("mu", mu)
        .with("sigma", sigma)
        .with("sigma_sq", p.sigma_sq())
        .with("regime", curve.regime.label.as_str())
        .with("narrow_max", thresholds.narrow_max)
        .with("very_broad_min", thresholds.very_broad_min)
        .with_opt("seed", (reps > 0).then_some(mc.seed))
        .with("reps", reps)
        .with_opt("bootstrap_reps", (reps > 0).then_some(mc.bootstrap_reps));
    sink.emit("regime", &meta, &curve.points, &Record::empty())?;
    Ok(Vec::new())
}
