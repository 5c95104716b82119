use std::f64::consts::{FRAC_2_PI, LN_2, PI};

use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::check_finite;
use crate::error::{Error, Result};
use crate::optim::{bfgs, BfgsOptions};
use crate::rng::Rng;
use crate::special::{norm_cdf, norm_ln_cdf_and_inv_mills, norm_ln_pdf, owen_t};
use crate::stats;

/// Largest shape magnitude the fitter reports; beyond it the fit is capped.
pub const SKEW_NORMAL_SHAPE_CAP: f64 = 50.0;

/// Azzalini skew-normal law with location `zeta`, scale `omega`, shape `alpha`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SkewNormalParams {
    pub zeta: f64,
    pub omega: f64,
    pub alpha: f64,
}

impl SkewNormalParams {
    pub fn new(zeta: f64, omega: f64, alpha: f64) -> Result<Self> {
        let p = Self { zeta, omega, alpha };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.zeta.is_finite() {
            return Err(Error::domain("zeta", self.zeta, "must be finite"));
        }
        if !(self.omega.is_finite() && self.omega > 0.0) {
            return Err(Error::domain("omega", self.omega, "must be positive and finite"));
        }
        if !self.alpha.is_finite() {
            return Err(Error::domain("alpha", self.alpha, "must be finite"));
        }
        Ok(())
    }

    pub fn delta(&self) -> f64 {
        self.alpha / (1.0 + self.alpha * self.alpha).sqrt()
    }

    pub fn mean(&self) -> f64 {
        self.zeta + self.omega * self.delta() * FRAC_2_PI.sqrt()
    }

    pub fn variance(&self) -> f64 {
        let d = self.delta();
        self.omega * self.omega * (1.0 - FRAC_2_PI * d * d)
    }

    /// Law of `X + Y` for independent `Y ~ Normal(shift, spread²)`.
    pub fn convolve_normal(&self, shift: f64, spread: f64) -> Result<Self> {
        let omega = (self.omega * self.omega + spread * spread).sqrt();
        let delta = self.delta() * self.omega / omega;
        Self::new(self.zeta + shift, omega, delta / (1.0 - delta * delta).sqrt())
    }

    /// `E[exp(X)]`.
    pub fn mean_exp(&self) -> f64 {
        2.0 * (self.zeta + 0.5 * self.omega * self.omega).exp() * norm_cdf(self.delta() * self.omega)
    }

    pub(crate) fn draw(&self, rng: &mut Rng) -> f64 {
        let u0: f64 = StandardNormal.sample(rng);
        let v: f64 = StandardNormal.sample(rng);
        let d = self.delta();
        let u1 = d * u0 + (1.0 - d * d).sqrt() * v;
        let z = if u0 >= 0.0 { u1 } else { -u1 };
        self.zeta + self.omega * z
    }

    pub fn ln_pdf(&self, x: f64) -> f64 {
        let z = (x - self.zeta) / self.omega;
        let (ln_cdf, _) = norm_ln_cdf_and_inv_mills(self.alpha * z);
        LN_2 - self.omega.ln() + norm_ln_pdf(z) + ln_cdf
    }

    pub fn pdf(&self, x: f64) -> f64 {
        self.ln_pdf(x).exp()
    }

    pub fn cdf(&self, x: f64) -> f64 {
        let z = (x - self.zeta) / self.omega;
        (norm_cdf(z) - 2.0 * owen_t(z, self.alpha)).clamp(0.0, 1.0)
    }

    /// Quantile by safeguarded Newton iteration on the CDF.
    pub fn quantile(&self, p: f64) -> f64 {
        if p <= 0.0 {
            return f64::NEG_INFINITY;
        }
        if p >= 1.0 {
            return f64::INFINITY;
        }
        let sd = self.variance().sqrt();
        let (mut lo, mut hi) = (self.mean() - 40.0 * sd, self.mean() + 40.0 * sd);
        let mut x = self.mean();
        for _ in 0..200 {
            let f = self.cdf(x) - p;
            if f.abs() < 1e-14 {
                break;
            }
            if f < 0.0 {
                lo = x;
            } else {
                hi = x;
            }
            let d = self.pdf(x);
            let newton = x - f / d;
            x = if d > 0.0 && newton > lo && newton < hi {
                newton
            } else {
                0.5 * (lo + hi)
            };
            if hi - lo < 1e-14 * (1.0 + x.abs()) {
                break;
            }
        }
        x
    }
}

/// Result of [`fit_skew_normal`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SkewNormalFit {
    pub params: SkewNormalParams,
    /// Mean log-likelihood per observation at the estimate.
    pub mean_log_likelihood: f64,
    pub iterations: usize,
    /// The unconstrained optimum had `|alpha|` above [`SKEW_NORMAL_SHAPE_CAP`].
    pub capped: bool,
}

/// Maximum-likelihood skew-normal fit.
///
/// Works on standardized data, starts from the method-of-moments estimate
/// (and a second start of moderate skew with the same sign), and refines
/// with BFGS. A shape beyond the cap is pinned at the cap and the location
/// and scale are re-optimized with `capped = true`.
pub fn fit_skew_normal(x: &[f64]) -> Result<SkewNormalFit> {
    if x.len() < 3 {
        return Err(Error::insufficient(3, x.len(), "skew-normal fit"));
    }
    check_finite(x, "x")?;
    let center = stats::mean(x);
    let spread = stats::variance_mle(x).sqrt();
    if spread.is_nan() || spread <= 1e-12 * (1.0 + center.abs()) {
        return Err(Error::fit("skew_normal", "zero dispersion", 0));
    }
    let u: Vec<f64> = x.iter().map(|v| (v - center) / spread).collect();

    let gamma = stats::skewness(&u);
    let alpha_mom = moments_shape(gamma);
    let side = if gamma < 0.0 { -1.0 } else { 1.0 };
    let starts = [alpha_mom, side * alpha_mom.abs().max(2.0)];

    let opts = BfgsOptions {
        max_iter: 400,
        grad_tol: 1e-9,
        value_tol: 1e-15,
    };
    let mut best: Option<(Vec<f64>, f64, usize)> = None;
    let mut total_iter = 0;
    let mut last_grad = f64::NAN;
    for a0 in starts {
        let m = bfgs(|th, g| nll(&u, th[0], th[1], th[2], g), &start_point(a0), opts);
        total_iter += m.iterations;
        last_grad = m.grad_norm;
        if m.converged && best.as_ref().is_none_or(|b| m.value < b.1) {
            best = Some((m.x, m.value, m.iterations));
        }
    }
    let Some((mut theta, mut value, _)) = best else {
        return Err(Error::fit(
            "skew_normal",
            format!("optimizer did not converge (|grad| = {last_grad:.3e})"),
            total_iter,
        ));
    };

    let mut capped = false;
    if theta[2].abs() > SKEW_NORMAL_SHAPE_CAP {
        let alpha = SKEW_NORMAL_SHAPE_CAP.copysign(theta[2]);
        let mut g3 = [0.0; 3];
        let m = bfgs(
            |th, g| {
                let v = nll(&u, th[0], th[1], alpha, &mut g3);
                g[0] = g3[0];
                g[1] = g3[1];
                v
            },
            &[theta[0], theta[1]],
            opts,
        );
        total_iter += m.iterations;
        if !m.converged {
            return Err(Error::fit(
                "skew_normal",
                format!("capped refit did not converge (|grad| = {:.3e})", m.grad_norm),
                total_iter,
            ));
        }
        theta = vec![m.x[0], m.x[1], alpha];
        value = m.value;
        capped = true;
    }

    let params = SkewNormalParams::new(center + spread * theta[0], spread * theta[1].exp(), theta[2])?;
    Ok(SkewNormalFit {
        params,
        mean_log_likelihood: -value - spread.ln(),
        iterations: total_iter,
        capped,
    })
}

// Method-of-moments shape from sample skewness, clamped below the
// skew-normal maximum of about 0.9953.
fn moments_shape(gamma: f64) -> f64 {
    let g = gamma.abs().min(0.99);
    let g23 = g.powf(2.0 / 3.0);
    let c = ((4.0 - PI) / 2.0).powf(2.0 / 3.0);
    let delta = (0.5 * PI * g23 / (g23 + c)).sqrt().min(0.995);
    (delta / (1.0 - delta * delta).sqrt()).copysign(gamma)
}

// Location and log-scale matching zero mean and unit variance for shape `alpha`.
fn start_point(alpha: f64) -> [f64; 3] {
    let d = alpha / (1.0 + alpha * alpha).sqrt();
    let omega = 1.0 / (1.0 - FRAC_2_PI * d * d).sqrt();
    [-omega * d * FRAC_2_PI.sqrt(), omega.ln(), alpha]
}

// Mean negative log-likelihood over `u` (without the constant), with gradient
// in (zeta, ln omega, alpha).
fn nll(u: &[f64], zeta: f64, log_omega: f64, alpha: f64, grad: &mut [f64]) -> f64 {
    let omega = log_omega.exp();
    let inv = 1.0 / omega;
    let (mut ll, mut gz, mut gw, mut ga) = (0.0, 0.0, 0.0, 0.0);
    for &v in u {
        let z = (v - zeta) * inv;
        let (ln_cdf, m) = norm_ln_cdf_and_inv_mills(alpha * z);
        ll += -0.5 * z * z + ln_cdf;
        gz += z - alpha * m;
        gw += z * z - alpha * z * m;
        ga += z * m;
    }
    let n = u.len() as f64;
    grad[0] = -gz * inv / n;
    grad[1] = -(gw / n - 1.0);
    grad[2] = -ga / n;
    -(ll / n - log_omega) - LN_2 + 0.918_938_533_204_672_8
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::adaptive_simpson;
    use crate::special::norm_pdf;

    #[test]
    fn density_integrates_to_cdf() {
        let p = SkewNormalParams::new(0.06, 0.09, 1.88).unwrap();
        let area = adaptive_simpson(|x| p.pdf(x), -1.0, 0.1, 1e-13);
        assert!((area - p.cdf(0.1)).abs() < 1e-9);
        let mean = adaptive_simpson(|x| x * p.pdf(x), -1.5, 1.5, 1e-13);
        assert!((mean - p.mean()).abs() < 1e-9);
    }

    #[test]
    fn zero_shape_is_normal() {
        let p = SkewNormalParams::new(1.0, 2.0, 0.0).unwrap();
        for x in [-3.0, 0.0, 1.0, 4.5] {
            let z = (x - 1.0) / 2.0;
            assert!((p.pdf(x) - norm_pdf(z) / 2.0).abs() < 1e-14);
            assert!((p.cdf(x) - norm_cdf(z)).abs() < 1e-14);
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let u = [-1.2, -0.3, 0.1, 0.4, 0.9, 1.7, 2.5];
        let th = [0.2, -0.1, 1.3];
        let mut g = [0.0; 3];
        nll(&u, th[0], th[1], th[2], &mut g);
        let mut scratch = [0.0; 3];
        for k in 0..3 {
            let h = 1e-6;
            let (mut a, mut b) = (th, th);
            a[k] += h;
            b[k] -= h;
            let fd = (nll(&u, a[0], a[1], a[2], &mut scratch) - nll(&u, b[0], b[1], b[2], &mut scratch))
                / (2.0 * h);
            assert!((fd - g[k]).abs() < 1e-7, "component {k}: {fd} vs {}", g[k]);
        }
    }

    #[test]
    fn convolution_with_normal_matches_moments() {
        let p = SkewNormalParams::new(0.06, 0.09, 1.88).unwrap();
        let q = p.convolve_normal(-0.3, 0.5).unwrap();
        assert!((q.mean() - (p.mean() - 0.3)).abs() < 1e-12);
        assert!((q.variance() - (p.variance() + 0.25)).abs() < 1e-12);
    }

    #[test]
    fn constant_data_fails() {
        assert!(matches!(
            fit_skew_normal(&[0.4; 10]),
            Err(Error::FitFailure { .. })
        ));
        assert!(matches!(
            fit_skew_normal(&[0.4, 0.5]),
            Err(Error::InsufficientData { .. })
        ));
    }

    #[test]
    fn moments_shape_sign_and_range() {
        assert_eq!(moments_shape(0.0), 0.0);
        assert!(moments_shape(0.5) > 0.0 && moments_shape(-0.5) < 0.0);
        assert!(moments_shape(5.0).is_finite());
    }
}
