use serde::{Deserialize, Serialize};
use winners::empirical::{mean_over_median_ci, ReturnSample};
use winners::index_model::{
    implied_lognormal, log_skew_normal_summary, model_ratios, simulate_index, simulate_index_skew_drift,
    DriftModelParams, SkewDriftParams, UnderperformanceRatios,
};
use winners::kde::{Kde, KdeOptions};
use winners::rng::SeedTree;
use winners::stats;

use crate::config::Settings;
use crate::report::{Record, Sink};
use crate::{Failure, Outcome};

#[derive(clap::Args, Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Args {
    /// Mean drift per year.
    #[arg(long, allow_hyphen_values = true)]
    pub mu_d: Option<f64>,
    /// Cross-sectional dispersion of the drift.
    #[arg(long)]
    pub sigma_d: Option<f64>,
    /// Common volatility.
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Horizon in years.
    #[arg(long, visible_alias = "T")]
    #[serde(alias = "T")]
    pub horizon: Option<f64>,
    /// Skew-normal drift: location μ_d, scale σ_d and this shape. The
    /// ratios are then computed numerically.
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<f64>,
    /// Simulate an index of this many stocks and add Monte Carlo columns;
    /// --reps sets the bootstrap resamples [default: 200].
    #[arg(long)]
    pub simulate: Option<usize>,
    /// Confidence level of the simulated interval [default: 0.95].
    #[arg(long)]
    pub level: Option<f64>,
}

impl Args {
    pub fn overlay(self, file: Args) -> Args {
        Args {
            mu_d: self.mu_d.or(file.mu_d),
            sigma_d: self.sigma_d.or(file.sigma_d),
            sigma: self.sigma.or(file.sigma),
            horizon: self.horizon.or(file.horizon),
            alpha: self.alpha.or(file.alpha),
            simulate: self.simulate.or(file.simulate),
            level: self.level.or(file.level),
        }
    }
}

/// Law of `ln ρ` (skew-normal; `alpha_m = 0` for the normal-drift model)
/// with the resulting ratios, and the simulated ones when requested.
#[derive(Debug, Serialize)]
struct ModelRow {
    mu_m: f64,
    sigma_m: f64,
    alpha_m: f64,
    mean_over_median: f64,
    mean_over_mode: f64,
    mc_stocks: Option<usize>,
    mc_mean_over_median: Option<f64>,
    mc_stderr: Option<f64>,
    mc_lo: Option<f64>,
    mc_hi: Option<f64>,
    mc_mean_over_mode: Option<f64>,
}

/// Terminal returns of an index of `n` stocks from a seed.
type Simulator = dyn Fn(usize, u64) -> winners::Result<ReturnSample>;

pub fn run(args: Args, settings: &Settings, sink: &mut Sink) -> Outcome {
    let missing: Vec<&str> = [
        ("--mu-d", args.mu_d),
        ("--sigma-d", args.sigma_d),
        ("--sigma", args.sigma),
        ("--horizon", args.horizon),
    ]
    .iter()
    .filter(|(_, v)| v.is_none())
    .map(|(k, _)| *k)
    .collect();
    if !missing.is_empty() {
        return Err(Failure::Usage(format!(
            "missing model parameters: {}",
            missing.join(", ")
        )));
    }
    let (mu_d, sigma_d, sigma, horizon) = (
        args.mu_d.unwrap(),
        args.sigma_d.unwrap(),
        args.sigma.unwrap(),
        args.horizon.unwrap(),
    );

    let (mut row, simulate): (ModelRow, Box<Simulator>) = match args.alpha {
        None => {
            let p = DriftModelParams::new(mu_d, sigma_d, sigma, horizon)?;
            let m = implied_lognormal(&p)?;
            (
                row_of(m.mu_m, m.sigma_m, 0.0, model_ratios(&p)?),
                Box::new(move |n, seed| simulate_index(&p, n, seed)),
            )
        }
        Some(alpha) => {
            let p = SkewDriftParams {
                zeta: mu_d,
                omega: sigma_d,
                alpha,
                sigma,
                horizon,
            };
            let law = p.log_return_law()?;
            let ratios = log_skew_normal_summary(&law)?.ratios();
            (
                row_of(law.zeta, law.omega, law.alpha, ratios),
                Box::new(move |n, seed| simulate_index_skew_drift(&p, n, seed)),
            )
        }
    };

    let mut meta = Record::new("model")
        .with("mu_d", mu_d)
        .with("sigma_d", sigma_d)
        .with("sigma", sigma)
        .with("horizon", horizon)
        .with_opt("alpha", args.alpha);
    if let Some(n) = args.simulate {
        let seed = settings.require_seed()?;
        let reps = settings.reps.unwrap_or(200);
        let level = args.level.unwrap_or(0.95);
        let tree = SeedTree::new(seed);
        let sample = simulate(n, tree.child(1).seed())?;
        let rho = sample.rho();
        let ci = mean_over_median_ci(rho, reps, level, tree.child(2).seed())?;
        let log_kde = KdeOptions {
            log_space: true,
            ..KdeOptions::default()
        };
        let mode = Kde::new(rho, &log_kde)?.mode_result().mode;
        row.mc_stocks = Some(n);
        row.mc_mean_over_median = Some(ci.estimate);
        row.mc_stderr = Some(ci.stderr);
        row.mc_lo = Some(ci.lo);
        row.mc_hi = Some(ci.hi);
        row.mc_mean_over_mode = Some(stats::mean(rho) / mode);
        meta = meta.with("seed", seed).with("reps", reps).with("level", level);
    }
    sink.emit("model", &meta, &[row], &Record::empty())?;
    Ok(Vec::new())
}

fn row_of(mu_m: f64, sigma_m: f64, alpha_m: f64, r: UnderperformanceRatios) -> ModelRow {
    ModelRow {
        mu_m,
        sigma_m,
        alpha_m,
        mean_over_median: r.mean_over_median,
        mean_over_mode: r.mean_over_mode,
        mc_stocks: None,
        mc_mean_over_median: None,
        mc_stderr: None,
        mc_lo: None,
        mc_hi: None,
        mc_mean_over_mode: None,
    }
}
