use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::check_positive;
use crate::error::{Error, Result};
use crate::rng::Rng;
use crate::special::{norm_cdf, norm_pdf, norm_quantile};
use crate::stats;

/// Log-normal law: `ln X ~ Normal(mu, sigma²)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogNormalParams {
    /// Location, in log units.
    pub mu: f64,
    /// Shape, in log units; strictly positive.
    pub sigma: f64,
}

impl LogNormalParams {
    pub fn new(mu: f64, sigma: f64) -> Result<Self> {
        let p = Self { mu, sigma };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.mu.is_finite() {
            return Err(Error::domain("mu", self.mu, "must be finite"));
        }
        if !(self.sigma.is_finite() && self.sigma > 0.0) {
            return Err(Error::domain("sigma", self.sigma, "must be positive and finite"));
        }
        Ok(())
    }

    pub fn sigma_sq(&self) -> f64 {
        self.sigma * self.sigma
    }

    /// Coefficient of variation `sqrt(exp(σ²) - 1)`.
    pub fn coeff_variation(&self) -> f64 {
        self.sigma_sq().exp_m1().sqrt()
    }

    pub fn mean(&self) -> f64 {
        (self.mu + 0.5 * self.sigma_sq()).exp()
    }

    /// Law of `a·X`; shifts the location by `ln a`, shape unchanged.
    pub fn scaled(&self, a: f64) -> Result<Self> {
        if !(a.is_finite() && a > 0.0) {
            return Err(Error::domain("a", a, "scale factor must be positive"));
        }
        Self::new(self.mu + a.ln(), self.sigma)
    }

    pub(crate) fn draw(&self, rng: &mut Rng) -> f64 {
        let z: f64 = StandardNormal.sample(rng);
        (self.mu + self.sigma * z).exp()
    }

    pub fn pdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        norm_pdf((x.ln() - self.mu) / self.sigma) / (x * self.sigma)
    }

    pub fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        norm_cdf((x.ln() - self.mu) / self.sigma)
    }

    pub fn quantile(&self, p: f64) -> f64 {
        (self.mu + self.sigma * norm_quantile(p)).exp()
    }
}

/// Closed-form summary statistics of a law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentSummary {
    pub mean: f64,
    pub median: f64,
    pub mode: f64,
    pub variance: f64,
    pub coeff_variation: f64,
}

/// Mean `e^{μ+σ²/2}`, median `e^μ`, mode `e^{μ-σ²}`,
/// variance `e^{2μ+σ²}(e^{σ²}-1)` and `C = sqrt(e^{σ²}-1)`.
pub fn lognormal_moments(p: &LogNormalParams) -> Result<MomentSummary> {
    p.validate()?;
    let s2 = p.sigma_sq();
    Ok(MomentSummary {
        mean: (p.mu + 0.5 * s2).exp(),
        median: p.mu.exp(),
        mode: (p.mu - s2).exp(),
        variance: (2.0 * p.mu + s2).exp() * s2.exp_m1(),
        coeff_variation: s2.exp_m1().sqrt(),
    })
}

/// Maximum-likelihood log-normal fit.
///
/// `sigma` may be zero for constant data; such fits carry `degenerate = true`
/// instead of failing, and [`LogNormalFit::params`] refuses to convert them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogNormalFit {
    pub mu: f64,
    pub sigma: f64,
    pub n: usize,
    pub degenerate: bool,
}

impl LogNormalFit {
    pub fn params(&self) -> Result<LogNormalParams> {
        if self.degenerate {
            return Err(Error::fit("lognormal", "degenerate fit (sigma = 0)", 0));
        }
        LogNormalParams::new(self.mu, self.sigma)
    }
}

/// `μ̂` is the mean of `ln x`, `σ̂` its standard deviation with divisor `n`.
pub fn fit_lognormal(x: &[f64]) -> Result<LogNormalFit> {
    if x.len() < 2 {
        return Err(Error::insufficient(2, x.len(), "log-normal fit"));
    }
    check_positive(x, "x")?;
    let logs: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let mu = stats::mean(&logs);
    let sigma = stats::variance_mle(&logs).sqrt();
    Ok(LogNormalFit {
        mu,
        sigma,
        n: x.len(),
        degenerate: sigma <= 1e-12 * (1.0 + mu.abs()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::{sample, Law};

    #[test]
    fn table_row_spx() {
        let m = lognormal_moments(&LogNormalParams::new(0.95, 1.02).unwrap()).unwrap();
        assert!((m.mean - 4.35).abs() < 0.01, "{m:?}");
        assert!((m.median - 2.59).abs() < 0.01);
        assert!((m.mode - 0.91).abs() < 0.01);
        assert!((m.coeff_variation - 1.35).abs() < 0.01);
        // PAPER table row: 4.37 / 2.60 / 0.92 / 1.35, inputs rounded
        assert!((m.mean - 4.37).abs() < 0.03);
        assert!((m.median - 2.60).abs() < 0.03);
        assert!((m.mode - 0.92).abs() < 0.03);
    }

    #[test]
    fn table_row_nifty() {
        let m = lognormal_moments(&LogNormalParams::new(1.65, 1.23).unwrap()).unwrap();
        assert!((m.mean - 11.09).abs() < 0.01, "{m:?}");
        assert!((m.median - 5.21).abs() < 0.01);
        assert!((m.mode - 1.15).abs() < 0.01);
    }

    #[test]
    fn near_point_mass() {
        let m = lognormal_moments(&LogNormalParams::new(0.0, 1e-8).unwrap()).unwrap();
        for v in [m.mean, m.median, m.mode] {
            assert!((v - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn rejects_bad_sigma() {
        for s in [0.0, -1.0, f64::NAN, f64::INFINITY] {
            let p = LogNormalParams { mu: 0.0, sigma: s };
            assert!(matches!(lognormal_moments(&p), Err(Error::Domain { .. })));
        }
    }

    #[test]
    fn constant_data_is_flagged_degenerate() {
        let e = std::f64::consts::E;
        let fit = fit_lognormal(&[e, e, e]).unwrap();
        assert!((fit.mu - 1.0).abs() < 1e-15);
        assert_eq!(fit.sigma, 0.0);
        assert!(fit.degenerate);
        assert!(fit.params().is_err());
    }

    #[test]
    fn fit_errors() {
        assert!(matches!(
            fit_lognormal(&[1.0]),
            Err(Error::InsufficientData { .. })
        ));
        assert!(matches!(fit_lognormal(&[1.0, 0.0]), Err(Error::Domain { .. })));
        assert!(matches!(fit_lognormal(&[1.0, -2.0]), Err(Error::Domain { .. })));
    }

    #[test]
    fn recovers_generating_params() {
        let law = Law::LogNormal(LogNormalParams::new(0.95, 1.02).unwrap());
        let x = sample(&law, 100_000, 3).unwrap();
        let fit = fit_lognormal(&x).unwrap();
        assert!((fit.mu - 0.95).abs() < 0.02);
        assert!((fit.sigma - 1.02).abs() < 0.02);
    }

    #[test]
    fn scaling_shifts_location_only() {
        let law = Law::LogNormal(LogNormalParams::new(0.3, 0.7).unwrap());
        let x = sample(&law, 1000, 4).unwrap();
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v).collect();
        let (fx, fy) = (fit_lognormal(&x).unwrap(), fit_lognormal(&y).unwrap());
        assert!((fy.mu - fx.mu - 2f64.ln()).abs() < 1e-12);
        assert!((fy.sigma - fx.sigma).abs() < 1e-12);
    }
}
