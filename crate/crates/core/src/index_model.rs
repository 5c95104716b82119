//! Index of independent GBM stocks whose drifts are spread across the
//! constituents.
//!
//! With drift `μ_i = μ_d + σ_d Z` and common volatility `σ`, the total return
//! over `T` years is log-normal with `μ_m = μ_d T − σ²T/2` and
//! `σ_m² = σ²T + σ_d²T²`, so the index mean beats the typical constituent by
//! closed-form factors. A skew-normal drift gives a log-skew-normal cross
//! section, handled numerically.

use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distributions::{GammaParams, LogNormalParams, SkewNormalParams};
use crate::empirical::ReturnSample;
use crate::optim::golden_max;
use crate::rng::SeedTree;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriftModelParams {
    /// Mean drift per year.
    pub mu_d: f64,
    /// Cross-sectional dispersion of the drift.
    pub sigma_d: f64,
    /// Common volatility per square-root year.
    pub sigma: f64,
    /// Horizon `T` in years.
    #[serde(alias = "T", alias = "t")]
    pub horizon: f64,
}

impl DriftModelParams {
    pub fn new(mu_d: f64, sigma_d: f64, sigma: f64, horizon: f64) -> Result<Self> {
        let p = Self {
            mu_d,
            sigma_d,
            sigma,
            horizon,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.mu_d.is_finite() {
            return Err(Error::domain("mu_d", self.mu_d, "must be finite"));
        }
        if !(self.sigma_d >= 0.0 && self.sigma_d.is_finite()) {
            return Err(Error::domain("sigma_d", self.sigma_d, "must be non-negative"));
        }
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return Err(Error::domain("sigma", self.sigma, "must be non-negative"));
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(Error::domain("T", self.horizon, "horizon must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImpliedLogNormal {
    pub mu_m: f64,
    pub sigma_m: f64,
}

impl ImpliedLogNormal {
    /// As log-normal parameters; fails for the noiseless model (`σ_m = 0`).
    pub fn params(&self) -> Result<LogNormalParams> {
        LogNormalParams::new(self.mu_m, self.sigma_m)
    }
}

pub fn implied_lognormal(p: &DriftModelParams) -> Result<ImpliedLogNormal> {
    p.validate()?;
    let t = p.horizon;
    Ok(ImpliedLogNormal {
        mu_m: p.mu_d * t - 0.5 * p.sigma * p.sigma * t,
        sigma_m: (p.sigma * p.sigma * t + p.sigma_d * p.sigma_d * t * t).sqrt(),
    })
}

/// How much the index mean exceeds the median and the mode constituent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnderperformanceRatios {
    pub mean_over_median: f64,
    pub mean_over_mode: f64,
}

pub fn model_ratios(p: &DriftModelParams) -> Result<UnderperformanceRatios> {
    let m = implied_lognormal(p)?;
    let half_var = 0.5 * m.sigma_m * m.sigma_m;
    Ok(UnderperformanceRatios {
        mean_over_median: half_var.exp(),
        mean_over_mode: (3.0 * half_var).exp(),
    })
}

/// Optional departures from the constant-volatility model.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct IndexSimOptions {
    /// Experimental: draw each stock's volatility from this gamma law,
    /// independently of its drift. No closed form covers this case.
    pub gamma_volatility: Option<GammaParams>,
}

const CHUNK: usize = 4096;

/// Terminal total returns of `n_stocks` independent stocks.
pub fn simulate_index(p: &DriftModelParams, n_stocks: usize, seed: u64) -> Result<ReturnSample> {
    simulate_index_with(p, n_stocks, seed, &IndexSimOptions::default())
}

pub fn simulate_index_with(
    p: &DriftModelParams,
    n_stocks: usize,
    seed: u64,
    opts: &IndexSimOptions,
) -> Result<ReturnSample> {
    p.validate()?;
    if let Some(g) = &opts.gamma_volatility {
        g.validate()?;
    }
    let t = p.horizon;
    let rho = simulate_terminal(n_stocks, seed, |rng| {
        let z1: f64 = StandardNormal.sample(rng);
        let z2: f64 = StandardNormal.sample(rng);
        let sigma = match &opts.gamma_volatility {
            Some(g) => g.draw(rng),
            None => p.sigma,
        };
        let mu = p.mu_d + p.sigma_d * z1;
        (mu * t - 0.5 * sigma * sigma * t + sigma * t.sqrt() * z2).exp()
    })?;
    Ok(ReturnSample::synthetic(rho))
}

fn simulate_terminal<F>(n_stocks: usize, seed: u64, draw: F) -> Result<Vec<f64>>
where
    F: Fn(&mut crate::rng::Rng) -> f64 + Sync,
{
    if n_stocks < 2 {
        return Err(Error::insufficient(2, n_stocks, "stocks in index"));
    }
    let tree = SeedTree::new(seed);
    let mut rho = vec![0.0; n_stocks];
    rho.par_chunks_mut(CHUNK).enumerate().for_each(|(c, chunk)| {
        let mut rng = tree.stream(c as u64);
        for r in chunk.iter_mut() {
            *r = draw(&mut rng);
        }
    });
    Ok(rho)
}

/// Index model with skew-normal drift.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SkewDriftParams {
    pub zeta: f64,
    pub omega: f64,
    pub alpha: f64,
    pub sigma: f64,
    #[serde(alias = "T", alias = "t")]
    pub horizon: f64,
}

impl SkewDriftParams {
    pub fn validate(&self) -> Result<()> {
        self.drift()?;
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return Err(Error::domain("sigma", self.sigma, "must be non-negative"));
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(Error::domain("T", self.horizon, "horizon must be positive"));
        }
        Ok(())
    }

    pub fn drift(&self) -> Result<SkewNormalParams> {
        SkewNormalParams::new(self.zeta, self.omega, self.alpha)
    }

    /// Law of the log total return: the drift law scaled by `T`, convolved
    /// with the diffusion `Normal(−σ²T/2, σ²T)`. It is skew-normal again.
    pub fn log_return_law(&self) -> Result<SkewNormalParams> {
        self.validate()?;
        let t = self.horizon;
        let scaled = SkewNormalParams::new(self.zeta * t, self.omega * t, self.alpha)?;
        scaled.convolve_normal(-0.5 * self.sigma * self.sigma * t, self.sigma * t.sqrt())
    }
}

pub fn simulate_index_skew_drift(p: &SkewDriftParams, n_stocks: usize, seed: u64) -> Result<ReturnSample> {
    let drift = p.drift()?;
    p.validate()?;
    let t = p.horizon;
    let rho = simulate_terminal(n_stocks, seed, |rng| {
        let mu = drift.draw(rng);
        let z: f64 = StandardNormal.sample(rng);
        (mu * t - 0.5 * p.sigma * p.sigma * t + p.sigma * t.sqrt() * z).exp()
    })?;
    Ok(ReturnSample::synthetic(rho))
}

/// Mean, median and mode of `e^X` for skew-normal `X`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogLawSummary {
    pub mean: f64,
    pub median: f64,
    pub mode: f64,
}

impl LogLawSummary {
    pub fn ratios(&self) -> UnderperformanceRatios {
        UnderperformanceRatios {
            mean_over_median: self.mean / self.median,
            mean_over_mode: self.mean / self.mode,
        }
    }
}

/// The mode and median have no closed form: the mode maximizes
/// `ln f_X(t) − t` by golden-section search (the objective is concave), the
/// median inverts the skew-normal CDF.
pub fn log_skew_normal_summary(law: &SkewNormalParams) -> Result<LogLawSummary> {
    law.validate()?;
    let sd = law.variance().sqrt();
    let centre = law.mean();
    let (lo, hi) = (centre - 12.0 * sd - law.omega, centre + 12.0 * sd);
    let (t_mode, _) = golden_max(|t| law.ln_pdf(t) - t, lo, hi, 1e-8 * (1.0 + centre.abs()));
    Ok(LogLawSummary {
        mean: law.mean_exp(),
        median: law.quantile(0.5).exp(),
        mode: t_mode.exp(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn paper() -> DriftModelParams {
        DriftModelParams::new(0.12, 0.03, 0.1, 16.0).unwrap()
    }

    #[test]
    fn implied_law() {
        let m = implied_lognormal(&paper()).unwrap();
        assert!((m.mu_m - 1.84).abs() < 1e-12);
        assert!((m.sigma_m - 0.3904f64.sqrt()).abs() < 1e-12);
        let gbm = implied_lognormal(&DriftModelParams::new(0.1, 0.0, 0.2, 4.0).unwrap()).unwrap();
        assert!((gbm.sigma_m - 0.4).abs() < 1e-15);
        let short = implied_lognormal(&DriftModelParams::new(0.1, 0.1, 0.2, 1e-12).unwrap()).unwrap();
        assert!(short.mu_m.abs() < 1e-12 && short.sigma_m < 1e-6);
    }

    #[test]
    fn ratios() {
        let r = model_ratios(&paper()).unwrap();
        assert!((r.mean_over_median - 0.1952f64.exp()).abs() < 1e-12);
        assert!((r.mean_over_mode - 0.5856f64.exp()).abs() < 1e-12);
        assert!((r.mean_over_mode - r.mean_over_median.powi(3)).abs() < 1e-12);
        let flat = model_ratios(&DriftModelParams::new(0.1, 0.0, 0.0, 5.0).unwrap()).unwrap();
        assert_eq!((flat.mean_over_median, flat.mean_over_mode), (1.0, 1.0));
    }

    #[test]
    fn invalid_params() {
        assert!(DriftModelParams::new(0.1, -0.1, 0.1, 1.0).is_err());
        assert!(DriftModelParams::new(0.1, 0.1, 0.1, 0.0).is_err());
        assert!(simulate_index(&paper(), 1, 0).is_err());
    }

    #[test]
    fn noiseless_index() {
        let p = DriftModelParams::new(0.1, 0.0, 0.0, 16.0).unwrap();
        let s = simulate_index(&p, 10, 1).unwrap();
        assert!(s.rho().iter().all(|r| (*r - 1.6f64.exp()).abs() < 1e-12));
    }

    #[test]
    fn gaussian_drift_summary_matches_closed_form() {
        let law = SkewNormalParams::new(0.3, 0.7, 0.0).unwrap();
        let s = log_skew_normal_summary(&law).unwrap();
        assert!((s.median - 0.3f64.exp()).abs() < 1e-9);
        assert!((s.mode - (0.3f64 - 0.49).exp()).abs() < 1e-7);
        assert!((s.mean - (0.3f64 + 0.245).exp()).abs() < 1e-12);
    }

    #[test]
    fn skew_drift_law_matches_simulation() {
        let p = SkewDriftParams {
            zeta: 0.06,
            omega: 0.09,
            alpha: 1.88,
            sigma: 0.29,
            horizon: 16.0,
        };
        let law = p.log_return_law().unwrap();
        let s = simulate_index_skew_drift(&p, 200_000, 3).unwrap();
        let logs: Vec<f64> = s.rho().iter().map(|r| r.ln()).collect();
        let m = crate::stats::mean(&logs);
        let se = (law.variance() / logs.len() as f64).sqrt();
        assert!((m - law.mean()).abs() < 4.0 * se, "{m} vs {}", law.mean());
    }
}
