use rand_distr::Distribution;
use serde::{Deserialize, Serialize};
use statrs::distribution::ContinuousCDF;

use super::check_positive;
use crate::error::{Error, Result};
use crate::rng::Rng;
use crate::special::{digamma, ln_gamma, trigamma};
use crate::stats;

/// Gamma law with `shape` and inverse-scale `rate`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaParams {
    pub shape: f64,
    pub rate: f64,
}

impl GammaParams {
    pub fn new(shape: f64, rate: f64) -> Result<Self> {
        let p = Self { shape, rate };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.shape.is_finite() && self.shape > 0.0) {
            return Err(Error::domain("shape", self.shape, "must be positive and finite"));
        }
        if !(self.rate.is_finite() && self.rate > 0.0) {
            return Err(Error::domain("rate", self.rate, "must be positive and finite"));
        }
        Ok(())
    }

    pub fn mean(&self) -> f64 {
        self.shape / self.rate
    }

    pub(crate) fn draw(&self, rng: &mut Rng) -> f64 {
        rand_distr::Gamma::new(self.shape, 1.0 / self.rate)
            .expect("validated gamma parameters")
            .sample(rng)
    }

    pub fn pdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        (self.shape * self.rate.ln() + (self.shape - 1.0) * x.ln() - self.rate * x - ln_gamma(self.shape))
            .exp()
    }

    pub fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        statrs::function::gamma::gamma_lr(self.shape, self.rate * x)
    }

    pub fn quantile(&self, p: f64) -> f64 {
        statrs::distribution::Gamma::new(self.shape, self.rate)
            .map(|g| g.inverse_cdf(p))
            .unwrap_or(f64::NAN)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GammaMethod {
    MaximumLikelihood,
    /// Newton iteration failed; shape and rate come from the first two moments.
    Moments,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GammaFitOptions {
    /// Upper bound on the fitted rate. When hit, the rate is pinned and the
    /// shape re-estimated by maximum likelihood at that rate.
    pub rate_cap: Option<f64>,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for GammaFitOptions {
    fn default() -> Self {
        Self {
            rate_cap: None,
            tol: 1e-10,
            max_iter: 100,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaFit {
    pub params: GammaParams,
    pub method: GammaMethod,
    pub iterations: usize,
    pub capped: bool,
}

pub fn fit_gamma(x: &[f64]) -> Result<GammaFit> {
    fit_gamma_with(x, GammaFitOptions::default())
}

/// Maximum-likelihood gamma fit: Newton iteration on
/// `ln k - ψ(k) = ln(mean x) - mean(ln x)` in `ln k`, rate `k / mean x`.
pub fn fit_gamma_with(x: &[f64], opts: GammaFitOptions) -> Result<GammaFit> {
    if x.len() < 3 {
        return Err(Error::insufficient(3, x.len(), "gamma fit"));
    }
    check_positive(x, "x")?;
    let m = stats::mean(x);
    let mean_ln = x.iter().map(|v| v.ln()).sum::<f64>() / x.len() as f64;
    let s = m.ln() - mean_ln;
    if s.is_nan() || s <= 1e-14 {
        return Err(Error::fit("gamma", "zero dispersion", 0));
    }

    let mut y = ((3.0 - s + ((s - 3.0).powi(2) + 24.0 * s).sqrt()) / (12.0 * s)).ln();
    let mut converged = false;
    let mut iterations = 0;
    for it in 1..=opts.max_iter {
        iterations = it;
        let k = y.exp();
        let f = y - digamma(k) - s;
        let df = 1.0 - k * trigamma(k);
        let step = f / df;
        if !step.is_finite() {
            break;
        }
        y -= step;
        if step.abs() < opts.tol {
            converged = true;
            break;
        }
    }

    let (mut params, method) = if converged && y.exp().is_finite() {
        let k = y.exp();
        (GammaParams::new(k, k / m)?, GammaMethod::MaximumLikelihood)
    } else {
        let v = stats::variance_mle(x);
        (GammaParams::new(m * m / v, m / v)?, GammaMethod::Moments)
    };

    let mut capped = false;
    if let Some(cap) = opts.rate_cap {
        if params.rate > cap {
            let k = statrs::function::gamma::inv_digamma(cap.ln() + mean_ln);
            params = GammaParams::new(k, cap)?;
            capped = true;
        }
    }

    Ok(GammaFit {
        params,
        method,
        iterations,
        capped,
    })
}
