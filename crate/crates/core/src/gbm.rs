//! Geometric Brownian motion: exact simulation, drift/volatility estimation
//! from a price path, and cross-sectional panels of estimates.

use std::collections::BTreeMap;

use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::distributions::{
    fit_gamma_with, fit_skew_normal, huber_regression, pearson_correlation, GammaFit, GammaFitOptions,
    HuberFit, SkewNormalFit,
};
use crate::rng::{rng_from_seed, Rng};
use crate::stats;
use crate::{Error, Result};

/// Drift `mu` and volatility `sigma`, both per unit time (years).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GBMParams {
    pub mu: f64,
    pub sigma: f64,
}

impl GBMParams {
    pub fn new(mu: f64, sigma: f64) -> Result<Self> {
        let p = Self { mu, sigma };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.mu.is_finite() {
            return Err(Error::domain("mu", self.mu, "must be finite"));
        }
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return Err(Error::domain(
                "sigma",
                self.sigma,
                "must be non-negative and finite",
            ));
        }
        Ok(())
    }
}

/// Prices observed every `dt` years; `prices[0]` is the starting price.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PricePath {
    pub prices: Vec<f64>,
    pub dt: f64,
}

impl PricePath {
    pub fn new(prices: Vec<f64>, dt: f64) -> Result<Self> {
        if prices.len() < 2 {
            return Err(Error::insufficient(2, prices.len(), "price path"));
        }
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::domain("dt", dt, "time step must be positive"));
        }
        if let Some(bad) = prices.iter().find(|p| !(**p > 0.0 && p.is_finite())) {
            return Err(Error::domain("price", *bad, "prices must be positive and finite"));
        }
        Ok(Self { prices, dt })
    }

    pub fn x0(&self) -> f64 {
        self.prices[0]
    }

    pub fn terminal(&self) -> f64 {
        self.prices[self.prices.len() - 1]
    }

    /// Number of increments.
    pub fn steps(&self) -> usize {
        self.prices.len() - 1
    }

    /// Horizon `steps · dt`.
    pub fn horizon(&self) -> f64 {
        self.steps() as f64 * self.dt
    }

    pub fn log_returns(&self) -> impl Iterator<Item = f64> + '_ {
        self.prices.windows(2).map(|w| (w[1] / w[0]).ln())
    }
}

pub fn simulate_gbm(p: &GBMParams, x0: f64, steps: usize, dt: f64, seed: u64) -> Result<PricePath> {
    simulate_gbm_with(p, x0, steps, dt, &mut rng_from_seed(seed))
}

/// Exact discretization: every log-increment is
/// `Normal((μ - σ²/2)·dt, σ²·dt)`.
pub fn simulate_gbm_with(p: &GBMParams, x0: f64, steps: usize, dt: f64, rng: &mut Rng) -> Result<PricePath> {
    p.validate()?;
    if steps == 0 {
        return Err(Error::domain("steps", 0.0, "need at least one step"));
    }
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::domain("dt", dt, "time step must be positive"));
    }
    if !(x0 > 0.0 && x0.is_finite()) {
        return Err(Error::domain("x0", x0, "starting price must be positive"));
    }
    let drift = (p.mu - 0.5 * p.sigma * p.sigma) * dt;
    let vol = p.sigma * dt.sqrt();
    let mut prices = Vec::with_capacity(steps + 1);
    prices.push(x0);
    let mut log_x = x0.ln();
    for _ in 0..steps {
        let z: f64 = StandardNormal.sample(rng);
        log_x += drift + vol * z;
        prices.push(log_x.exp());
    }
    Ok(PricePath { prices, dt })
}

/// Variance estimator used by [`estimate_gbm_with`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorMode {
    /// `σ̂² = (Σr² − (Σr)²/(T−1)) / (T·dt)` with `T` increments. Can go
    /// negative on drift-dominated paths; clamped at zero.
    #[default]
    AsPrinted,
    /// Per-step demeaned maximum likelihood, `Σ(r − r̄)² / (T·dt)`.
    Demeaned,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GBMEstimate {
    pub mu_hat: f64,
    pub sigma_hat: f64,
    /// Variance estimate before clamping.
    pub sigma_sq_raw: f64,
    pub clamped: bool,
}

pub fn estimate_gbm(path: &PricePath) -> Result<GBMEstimate> {
    estimate_gbm_with(path, EstimatorMode::AsPrinted)
}

/// Drift and volatility from one path. `μ̂ = ln(X_T/X_0)/(T·dt) + σ̂²/2`,
/// always with the clamped variance.
pub fn estimate_gbm_with(path: &PricePath, mode: EstimatorMode) -> Result<GBMEstimate> {
    if path.prices.len() < 3 {
        return Err(Error::insufficient(3, path.prices.len(), "GBM estimation"));
    }
    let t = path.steps() as f64;
    let (mut s1, mut s2) = (0.0, 0.0);
    for r in path.log_returns() {
        s1 += r;
        s2 += r * r;
    }
    let divisor = match mode {
        EstimatorMode::AsPrinted => t - 1.0,
        EstimatorMode::Demeaned => t,
    };
    let sigma_sq_raw = (s2 - s1 * s1 / divisor) / path.horizon();
    let clamped = sigma_sq_raw < 0.0;
    let sigma_sq = sigma_sq_raw.max(0.0);
    let total = (path.terminal() / path.x0()).ln();
    Ok(GBMEstimate {
        mu_hat: total / path.horizon() + 0.5 * sigma_sq,
        sigma_hat: sigma_sq.sqrt(),
        sigma_sq_raw,
        clamped,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PanelOptions {
    pub mode: EstimatorMode,
    /// Paths covering less than this fraction of the longest path are
    /// treated as delisted and excluded.
    pub min_coverage: f64,
    pub gamma: GammaFitOptions,
}

impl Default for PanelOptions {
    fn default() -> Self {
        Self {
            mode: EstimatorMode::AsPrinted,
            min_coverage: 0.8,
            gamma: GammaFitOptions::default(),
        }
    }
}

/// Why a path was left out of a panel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Exclusion {
    pub ticker: String,
    pub reason: String,
}

/// Per-ticker estimates and the cross-sectional fits over them.
///
/// Each fit is kept as its own `Result`: a failed fit does not discard the
/// rest of the panel.
#[derive(Debug, Clone, PartialEq)]
pub struct DriftVolPanel {
    pub estimates: Vec<(String, GBMEstimate)>,
    pub excluded: Vec<Exclusion>,
    pub stats: PanelStats,
    pub drift_fit: Result<SkewNormalFit>,
    pub vol_fit: Result<GammaFit>,
    pub regression: Result<HuberFit>,
    pub correlation: Result<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PanelStats {
    pub n: usize,
    pub mean_mu: f64,
    /// Sample standard deviation (divisor `n − 1`) of `μ̂`.
    pub std_mu: f64,
    pub mean_sigma: f64,
    pub clamped: usize,
}

impl PanelStats {
    pub fn from_estimates(est: &[GBMEstimate]) -> Self {
        let mu: Vec<f64> = est.iter().map(|e| e.mu_hat).collect();
        let sigma: Vec<f64> = est.iter().map(|e| e.sigma_hat).collect();
        Self {
            n: est.len(),
            mean_mu: stats::mean(&mu),
            std_mu: if est.len() > 1 {
                stats::std_dev(&mu)
            } else {
                f64::NAN
            },
            mean_sigma: stats::mean(&sigma),
            clamped: est.iter().filter(|e| e.clamped).count(),
        }
    }
}

impl DriftVolPanel {
    pub fn any_fit_failed(&self) -> bool {
        self.drift_fit.is_err()
            || self.vol_fit.is_err()
            || self.regression.is_err()
            || self.correlation.is_err()
    }

    /// Flat row in the column layout of the drift/volatility table.
    pub fn row(&self, index: &str) -> PanelRow {
        let drift = self.drift_fit.as_ref().ok().map(|f| f.params);
        let vol = self.vol_fit.as_ref().ok().map(|f| f.params);
        let reg = self.regression.as_ref().ok();
        PanelRow {
            index: index.to_string(),
            n: self.stats.n,
            mean_mu: self.stats.mean_mu,
            std_mu: self.stats.std_mu,
            zeta: drift.map(|p| p.zeta),
            omega: drift.map(|p| p.omega),
            alpha: drift.map(|p| p.alpha),
            mean_sigma: self.stats.mean_sigma,
            gamma_shape: vol.map(|p| p.shape),
            gamma_rate: vol.map(|p| p.rate),
            a: reg.map(|r| r.slope),
            b: reg.map(|r| r.intercept),
            r2: reg.map(|r| r.r2),
            corr: self.correlation.as_ref().ok().copied(),
            clamped: self.stats.clamped,
            excluded: self.excluded.len(),
        }
    }

    /// `(field, message)` for every failed fit.
    pub fn failures(&self) -> Vec<(&'static str, String)> {
        let mut out = Vec::new();
        if let Err(e) = &self.drift_fit {
            out.push(("drift_fit", e.to_string()));
        }
        if let Err(e) = &self.vol_fit {
            out.push(("vol_fit", e.to_string()));
        }
        if let Err(e) = &self.regression {
            out.push(("regression", e.to_string()));
        }
        if let Err(e) = &self.correlation {
            out.push(("correlation", e.to_string()));
        }
        out
    }
}

/// One row of the drift/volatility table; failed fits are `None`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PanelRow {
    pub index: String,
    pub n: usize,
    pub mean_mu: f64,
    pub std_mu: f64,
    pub zeta: Option<f64>,
    pub omega: Option<f64>,
    pub alpha: Option<f64>,
    pub mean_sigma: f64,
    pub gamma_shape: Option<f64>,
    pub gamma_rate: Option<f64>,
    pub a: Option<f64>,
    pub b: Option<f64>,
    pub r2: Option<f64>,
    pub corr: Option<f64>,
    pub clamped: usize,
    pub excluded: usize,
}

pub fn build_panel(paths: &BTreeMap<String, PricePath>) -> Result<DriftVolPanel> {
    build_panel_with(paths, &PanelOptions::default())
}

/// Estimates every path, drops short (delisted) ones, then fits a
/// skew-normal law to `μ̂`, a gamma law to `σ̂`, the Huber line
/// `μ̂ = a·σ̂ + b` and the correlation of the two.
pub fn build_panel_with(paths: &BTreeMap<String, PricePath>, opts: &PanelOptions) -> Result<DriftVolPanel> {
    if !(opts.min_coverage >= 0.0 && opts.min_coverage <= 1.0) {
        return Err(Error::domain(
            "min_coverage",
            opts.min_coverage,
            "must lie in [0, 1]",
        ));
    }
    let longest = paths.values().map(PricePath::horizon).fold(0.0, f64::max);
    let mut estimates = Vec::new();
    let mut excluded = Vec::new();
    for (ticker, path) in paths {
        if path.horizon() < opts.min_coverage * longest {
            excluded.push(Exclusion {
                ticker: ticker.clone(),
                reason: format!(
                    "covers {:.1}% of the panel window",
                    100.0 * path.horizon() / longest
                ),
            });
            continue;
        }
        match estimate_gbm_with(path, opts.mode) {
            Ok(e) => estimates.push((ticker.clone(), e)),
            Err(e) => excluded.push(Exclusion {
                ticker: ticker.clone(),
                reason: e.to_string(),
            }),
        }
    }
    if estimates.len() < 3 {
        return Err(Error::insufficient(3, estimates.len(), "usable paths in panel"));
    }
    let est: Vec<GBMEstimate> = estimates.iter().map(|(_, e)| *e).collect();
    let mu: Vec<f64> = est.iter().map(|e| e.mu_hat).collect();
    let sigma: Vec<f64> = est.iter().map(|e| e.sigma_hat).collect();
    Ok(DriftVolPanel {
        stats: PanelStats::from_estimates(&est),
        drift_fit: fit_skew_normal(&mu),
        vol_fit: fit_gamma_with(&sigma, opts.gamma),
        regression: huber_regression(&sigma, &mu),
        correlation: pearson_correlation(&mu, &sigma),
        estimates,
        excluded,
    })
}
