//! Probability laws used across the crate: densities, samplers, closed-form
//! log-normal statistics and maximum-likelihood fitters.
//!
//! Every parameter type is a plain value; operations validate their inputs
//! and report [`Error::Domain`] for out-of-range parameters.

mod gamma;
mod laplace;
mod lognormal;
mod normal;
mod regression;
mod skew_normal;

pub use gamma::{fit_gamma, fit_gamma_with, GammaFit, GammaFitOptions, GammaMethod, GammaParams};
pub use laplace::{fit_asymmetric_laplace, fit_laplace, AsymmetricLaplaceFit, AsymmetricLaplaceParams};
pub use lognormal::{fit_lognormal, lognormal_moments, LogNormalFit, LogNormalParams, MomentSummary};
pub use normal::{fit_normal, NormalParams};
pub use regression::{huber_regression, pearson_correlation, HuberFit, HUBER_TUNING};
pub use skew_normal::{fit_skew_normal, SkewNormalFit, SkewNormalParams, SKEW_NORMAL_SHAPE_CAP};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{rng_from_seed, Rng};

/// Any of the supported laws, for code that is generic over the family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Law {
    Normal(NormalParams),
    LogNormal(LogNormalParams),
    SkewNormal(SkewNormalParams),
    AsymmetricLaplace(AsymmetricLaplaceParams),
    Gamma(GammaParams),
}

impl Law {
    pub fn validate(&self) -> Result<()> {
        match self {
            Law::Normal(p) => p.validate(),
            Law::LogNormal(p) => p.validate(),
            Law::SkewNormal(p) => p.validate(),
            Law::AsymmetricLaplace(p) => p.validate(),
            Law::Gamma(p) => p.validate(),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Law::Normal(_) => "normal",
            Law::LogNormal(_) => "lognormal",
            Law::SkewNormal(_) => "skew_normal",
            Law::AsymmetricLaplace(_) => "asymmetric_laplace",
            Law::Gamma(_) => "gamma",
        }
    }

    /// Draw one value. Parameters are assumed valid.
    pub fn draw(&self, rng: &mut Rng) -> f64 {
        match self {
            Law::Normal(p) => p.draw(rng),
            Law::LogNormal(p) => p.draw(rng),
            Law::SkewNormal(p) => p.draw(rng),
            Law::AsymmetricLaplace(p) => p.draw(rng),
            Law::Gamma(p) => p.draw(rng),
        }
    }

    /// `n` i.i.d. draws from an explicit generator.
    pub fn sample_with(&self, rng: &mut Rng, n: usize) -> Result<Vec<f64>> {
        self.validate()?;
        Ok((0..n).map(|_| self.draw(rng)).collect())
    }

    pub fn pdf(&self, x: f64) -> f64 {
        match self {
            Law::Normal(p) => p.pdf(x),
            Law::LogNormal(p) => p.pdf(x),
            Law::SkewNormal(p) => p.pdf(x),
            Law::AsymmetricLaplace(p) => p.pdf(x),
            Law::Gamma(p) => p.pdf(x),
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match self {
            Law::Normal(p) => p.cdf(x),
            Law::LogNormal(p) => p.cdf(x),
            Law::SkewNormal(p) => p.cdf(x),
            Law::AsymmetricLaplace(p) => p.cdf(x),
            Law::Gamma(p) => p.cdf(x),
        }
    }

    pub fn quantile(&self, prob: f64) -> f64 {
        match self {
            Law::Normal(p) => p.quantile(prob),
            Law::LogNormal(p) => p.quantile(prob),
            Law::SkewNormal(p) => p.quantile(prob),
            Law::AsymmetricLaplace(p) => p.quantile(prob),
            Law::Gamma(p) => p.quantile(prob),
        }
    }

    pub fn mean(&self) -> f64 {
        match self {
            Law::Normal(p) => p.mean,
            Law::LogNormal(p) => (p.mu + 0.5 * p.sigma * p.sigma).exp(),
            Law::SkewNormal(p) => p.mean(),
            Law::AsymmetricLaplace(p) => p.mean(),
            Law::Gamma(p) => p.shape / p.rate,
        }
    }
}

/// `n` i.i.d. draws from `law`; the same `(law, n, seed)` always yields
/// the same stream.
pub fn sample(law: &Law, n: usize, seed: u64) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::insufficient(1, 0, "sample size"));
    }
    law.sample_with(&mut rng_from_seed(seed), n)
}

pub(crate) fn check_finite(x: &[f64], name: &'static str) -> Result<()> {
    match x.iter().find(|v| !v.is_finite()) {
        Some(&v) => Err(Error::domain(name, v, "values must be finite")),
        None => Ok(()),
    }
}

pub(crate) fn check_positive(x: &[f64], name: &'static str) -> Result<()> {
    match x.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
        Some(&v) => Err(Error::domain(name, v, "values must be positive and finite")),
        None => Ok(()),
    }
}
