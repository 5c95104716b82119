//! Typical value of the finite-sample mean of log-normal returns.
//!
//! For `N` i.i.d. log-normal returns the sample mean `Y_N` is right-skewed,
//! and its mode — what a typical portfolio of `N` stocks realizes — lies
//! below the true mean. Three closed forms cover narrow, moderately broad and
//! very broad laws; a Monte Carlo estimator measures the mode directly.

use std::io::Write;

use rand::Rng as _;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distributions::LogNormalParams;
use crate::kde::{Kde, KdeOptions};
use crate::rng::SeedTree;
use crate::{Error, Result};

/// Exponent `ln(3/2)/ln 2` of the very broad regime.
pub fn broad_exponent() -> f64 {
    1.5f64.ln() / 2f64.ln()
}

/// Boundaries on `σ²` between the three regimes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RegimeThresholds {
    /// `σ²` at or below this is narrow.
    pub narrow_max: f64,
    /// `σ²` at or above this is very broad.
    pub very_broad_min: f64,
}

impl Default for RegimeThresholds {
    fn default() -> Self {
        Self {
            narrow_max: 0.1,
            very_broad_min: 4.0,
        }
    }
}

impl RegimeThresholds {
    pub fn validate(&self) -> Result<()> {
        if !(self.narrow_max > 0.0 && self.narrow_max.is_finite()) {
            return Err(Error::domain("narrow_max", self.narrow_max, "must be positive"));
        }
        if !(self.very_broad_min > self.narrow_max && self.very_broad_min.is_finite()) {
            return Err(Error::domain(
                "very_broad_min",
                self.very_broad_min,
                "must exceed narrow_max",
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Narrow,
    ModeratelyBroad,
    VeryBroad,
}

impl Regime {
    pub fn as_str(&self) -> &'static str {
        match self {
            Regime::Narrow => "narrow",
            Regime::ModeratelyBroad => "moderately_broad",
            Regime::VeryBroad => "very_broad",
        }
    }
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeLabel {
    pub label: Regime,
    pub sigma_sq: f64,
}

pub fn classify_regime(p: &LogNormalParams) -> Result<RegimeLabel> {
    classify_regime_with(p, &RegimeThresholds::default())
}

pub fn classify_regime_with(p: &LogNormalParams, t: &RegimeThresholds) -> Result<RegimeLabel> {
    p.validate()?;
    t.validate()?;
    let s2 = p.sigma_sq();
    let label = if s2 <= t.narrow_max {
        Regime::Narrow
    } else if s2 >= t.very_broad_min {
        Regime::VeryBroad
    } else {
        Regime::ModeratelyBroad
    };
    Ok(RegimeLabel { label, sigma_sq: s2 })
}

/// Narrow regime: the typical mean is the median, `e^{-σ²/2}` of the mean.
pub fn ratio_narrow(p: &LogNormalParams) -> f64 {
    (-0.5 * p.sigma_sq()).exp()
}

/// Moderately broad regime: `(1 + C²/N)^{-3/2}`.
pub fn ratio_moderately_broad(p: &LogNormalParams, n: u64) -> f64 {
    let c2 = p.sigma_sq().exp_m1();
    (1.0 + c2 / n as f64).powf(-1.5)
}

/// Very broad regime: `exp(-1.5 σ² / N^{ln 1.5 / ln 2})`.
pub fn ratio_very_broad(p: &LogNormalParams, n: u64) -> f64 {
    (-1.5 * p.sigma_sq() / (n as f64).powf(broad_exponent())).exp()
}

fn check_size(n: u64) -> Result<()> {
    if n == 0 {
        return Err(Error::domain("n", 0.0, "portfolio size must be at least 1"));
    }
    Ok(())
}

/// Ratio of the typical `N`-stock average to the true mean, using the
/// closed form of the regime `p` falls into.
pub fn typical_mean_ratio(p: &LogNormalParams, n: u64) -> Result<f64> {
    typical_mean_ratio_with(p, n, &RegimeThresholds::default())
}

pub fn typical_mean_ratio_with(p: &LogNormalParams, n: u64, t: &RegimeThresholds) -> Result<f64> {
    Ok(typical_mean_report(p, n, t)?.ratio)
}

/// Closed-form ratio together with the regime label and, near the boundary
/// between the broad regimes (`1 ≤ σ² ≤ 4` by default), both broad formulas.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatioReport {
    pub n: u64,
    pub regime: RegimeLabel,
    pub ratio: f64,
    pub moderately_broad: Option<f64>,
    pub very_broad: Option<f64>,
}

pub fn typical_mean_report(p: &LogNormalParams, n: u64, t: &RegimeThresholds) -> Result<RatioReport> {
    check_size(n)?;
    let regime = classify_regime_with(p, t)?;
    let ratio = match regime.label {
        Regime::Narrow => ratio_narrow(p),
        Regime::ModeratelyBroad => ratio_moderately_broad(p, n),
        Regime::VeryBroad => ratio_very_broad(p, n),
    };
    let s2 = regime.sigma_sq;
    let both = (1.0..=t.very_broad_min.max(1.0)).contains(&s2);
    Ok(RatioReport {
        n,
        regime,
        ratio,
        moderately_broad: both.then(|| ratio_moderately_broad(p, n)),
        very_broad: both.then(|| ratio_very_broad(p, n)),
    })
}

/// Monte Carlo settings for [`mc_typical_mean_with`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct McOptions {
    pub reps: usize,
    pub seed: u64,
    /// Bootstrap resamples for the standard error of the mode.
    pub bootstrap_reps: usize,
    /// Density estimate of the sample means. The mode is searched in log
    /// space by default: the sample-mean law is strongly right-skewed and a
    /// linear-space kernel biases the mode upward by an amount comparable to
    /// the effect being measured.
    pub kde: KdeOptions,
}

impl Default for McOptions {
    fn default() -> Self {
        Self {
            reps: 100_000,
            seed: 0,
            bootstrap_reps: 100,
            kde: KdeOptions {
                log_space: true,
                ..KdeOptions::default()
            },
        }
    }
}

pub const MIN_REPS: usize = 10_000;
const CHUNK: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    /// Mode of the simulated `Y_N` divided by the true mean.
    pub mode_ratio: f64,
    /// Bootstrap standard error of `mode_ratio`.
    pub stderr: f64,
    pub bandwidth: f64,
    pub stable: bool,
}

/// `reps` independent sample means of `n` log-normal draws.
///
/// Replications are split into fixed-size chunks, each with its own random
/// stream, so the output does not depend on the thread count.
pub fn sample_means(p: &LogNormalParams, n: u64, reps: usize, seed: u64) -> Result<Vec<f64>> {
    p.validate()?;
    check_size(n)?;
    let tree = SeedTree::new(seed);
    let (mu, sigma) = (p.mu, p.sigma);
    let mut out = vec![0.0; reps];
    out.par_chunks_mut(CHUNK).enumerate().for_each(|(c, chunk)| {
        let mut rng = tree.stream(c as u64);
        for y in chunk.iter_mut() {
            let mut s = 0.0;
            for _ in 0..n {
                let z: f64 = rng.sample(StandardNormal);
                s += (mu + sigma * z).exp();
            }
            *y = s / n as f64;
        }
    });
    Ok(out)
}

/// Mode of the simulated `N`-stock average relative to the true mean.
pub fn mc_typical_mean(p: &LogNormalParams, n: u64, reps: usize, seed: u64) -> Result<McEstimate> {
    mc_typical_mean_with(
        p,
        n,
        &McOptions {
            reps,
            seed,
            ..McOptions::default()
        },
    )
}

pub fn mc_typical_mean_with(p: &LogNormalParams, n: u64, opts: &McOptions) -> Result<McEstimate> {
    if opts.reps < MIN_REPS {
        return Err(Error::insufficient(
            MIN_REPS,
            opts.reps,
            "Monte Carlo replications",
        ));
    }
    let tree = SeedTree::new(opts.seed);
    let y = sample_means(p, n, opts.reps, tree.child(1).seed())?;
    let kde = Kde::new(&y, &opts.kde)?;
    let r = kde.mode_result();
    let se = kde.bootstrap_se(opts.bootstrap_reps, &mut tree.child(2).stream(0));
    let mean = p.mean();
    Ok(McEstimate {
        mode_ratio: r.mode / mean,
        stderr: se / mean,
        bandwidth: r.bandwidth,
        stable: r.stable,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub n: u64,
    pub ratio_analytic: f64,
    pub ratio_mc: Option<f64>,
    pub mc_stderr: Option<f64>,
    /// Both broad-regime formulas, present near the regime boundary.
    pub moderately_broad: Option<f64>,
    pub very_broad: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeCurve {
    pub params: LogNormalParams,
    pub regime: RegimeLabel,
    pub points: Vec<CurvePoint>,
}

/// Analytic ratio on `n_grid`, plus Monte Carlo estimates when `reps > 0`.
///
/// Every grid point draws from its own seed, derived from `seed` and `n`.
pub fn regime_curve(p: &LogNormalParams, n_grid: &[u64], reps: usize, seed: u64) -> Result<RegimeCurve> {
    regime_curve_with(
        p,
        n_grid,
        &RegimeThresholds::default(),
        &McOptions {
            reps,
            seed,
            ..McOptions::default()
        },
    )
}

pub fn regime_curve_with(
    p: &LogNormalParams,
    n_grid: &[u64],
    thresholds: &RegimeThresholds,
    mc: &McOptions,
) -> Result<RegimeCurve> {
    if n_grid.is_empty() {
        return Err(Error::insufficient(1, 0, "portfolio size grid"));
    }
    if let Some(w) = n_grid.windows(2).find(|w| w[1] <= w[0]) {
        return Err(Error::domain(
            "n_grid",
            w[1] as f64,
            "sizes must be strictly increasing",
        ));
    }
    let regime = classify_regime_with(p, thresholds)?;
    let tree = SeedTree::new(mc.seed);
    let points = n_grid
        .iter()
        .map(|&n| {
            let r = typical_mean_report(p, n, thresholds)?;
            let est = if mc.reps > 0 {
                let opts = McOptions {
                    seed: tree.child(n).seed(),
                    ..*mc
                };
                Some(mc_typical_mean_with(p, n, &opts)?)
            } else {
                None
            };
            Ok(CurvePoint {
                n,
                ratio_analytic: r.ratio,
                ratio_mc: est.map(|e| e.mode_ratio),
                mc_stderr: est.map(|e| e.stderr),
                moderately_broad: r.moderately_broad,
                very_broad: r.very_broad,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RegimeCurve {
        params: *p,
        regime,
        points,
    })
}

impl RegimeCurve {
    /// CSV with columns `n, ratio_analytic, ratio_mc, mc_stderr`, followed by
    /// both broad-regime formulas when any point carries them. Missing values
    /// are empty fields.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let both = self.points.iter().any(|p| p.moderately_broad.is_some());
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["n", "ratio_analytic", "ratio_mc", "mc_stderr"];
        if both {
            header.extend(["ratio_moderately_broad", "ratio_very_broad"]);
        }
        w.write_record(&header).map_err(csv_err)?;
        let opt = |v: Option<f64>| v.map(fmt_real).unwrap_or_default();
        for p in &self.points {
            let mut row = vec![
                p.n.to_string(),
                fmt_real(p.ratio_analytic),
                opt(p.ratio_mc),
                opt(p.mc_stderr),
            ];
            if both {
                row.push(opt(p.moderately_broad));
                row.push(opt(p.very_broad));
            }
            w.write_record(&row).map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }
}

pub(crate) fn fmt_real(v: f64) -> String {
    format!("{v:.10}")
}

pub(crate) fn csv_err(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

/// Share of the portfolio sum contributed by its largest term, for each of
/// `reps` simulated portfolios of `n` log-normal returns.
pub fn largest_term_shares(p: &LogNormalParams, n: u64, reps: usize, seed: u64) -> Result<Vec<f64>> {
    p.validate()?;
    check_size(n)?;
    let tree = SeedTree::new(seed);
    let (mu, sigma) = (p.mu, p.sigma);
    let mut out = vec![0.0; reps];
    out.par_chunks_mut(CHUNK).enumerate().for_each(|(c, chunk)| {
        let mut rng = tree.stream(c as u64);
        for share in chunk.iter_mut() {
            let (mut s, mut m) = (0.0f64, 0.0f64);
            for _ in 0..n {
                let z: f64 = rng.sample(StandardNormal);
                let v = (mu + sigma * z).exp();
                s += v;
                m = m.max(v);
            }
            *share = m / s;
        }
    });
    Ok(out)
}
