use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::check_finite;
use crate::error::{Error, Result};
use crate::rng::Rng;
use crate::special::{norm_cdf, norm_pdf, norm_quantile};
use crate::stats;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalParams {
    pub mean: f64,
    pub std: f64,
}

impl NormalParams {
    pub fn new(mean: f64, std: f64) -> Result<Self> {
        let p = Self { mean, std };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.mean.is_finite() {
            return Err(Error::domain("mean", self.mean, "must be finite"));
        }
        if !(self.std.is_finite() && self.std > 0.0) {
            return Err(Error::domain("std", self.std, "must be positive and finite"));
        }
        Ok(())
    }

    pub(crate) fn draw(&self, rng: &mut Rng) -> f64 {
        let z: f64 = StandardNormal.sample(rng);
        self.mean + self.std * z
    }

    pub fn pdf(&self, x: f64) -> f64 {
        norm_pdf((x - self.mean) / self.std) / self.std
    }

    pub fn cdf(&self, x: f64) -> f64 {
        norm_cdf((x - self.mean) / self.std)
    }

    pub fn quantile(&self, p: f64) -> f64 {
        self.mean + self.std * norm_quantile(p)
    }
}

/// Maximum-likelihood normal fit (divisor `n`).
pub fn fit_normal(x: &[f64]) -> Result<NormalParams> {
    if x.len() < 2 {
        return Err(Error::insufficient(2, x.len(), "normal fit"));
    }
    check_finite(x, "x")?;
    let std = stats::variance_mle(x).sqrt();
    if std == 0.0 {
        return Err(Error::fit("normal", "zero dispersion", 0));
    }
    Ok(NormalParams {
        mean: stats::mean(x),
        std,
    })
}
