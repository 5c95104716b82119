use rand::Rng as _;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

use super::check_finite;
use crate::error::{Error, Result};
use crate::rng::Rng;
use crate::stats;

/// Asymmetric Laplace law.
///
/// Density `exp(-asymmetry·(x-location)/scale)` right of the location and
/// `exp((x-location)/(asymmetry·scale))` left of it, normalized by
/// `scale·(asymmetry + 1/asymmetry)`. `asymmetry = 1` is the symmetric
/// Laplace law; `asymmetry > 1` puts more mass on the left.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymmetricLaplaceParams {
    pub location: f64,
    pub scale: f64,
    pub asymmetry: f64,
}

impl AsymmetricLaplaceParams {
    pub fn new(location: f64, scale: f64, asymmetry: f64) -> Result<Self> {
        let p = Self {
            location,
            scale,
            asymmetry,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn laplace(location: f64, scale: f64) -> Result<Self> {
        Self::new(location, scale, 1.0)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.location.is_finite() {
            return Err(Error::domain("location", self.location, "must be finite"));
        }
        if !(self.scale.is_finite() && self.scale > 0.0) {
            return Err(Error::domain("scale", self.scale, "must be positive and finite"));
        }
        if !(self.asymmetry.is_finite() && self.asymmetry > 0.0) {
            return Err(Error::domain(
                "asymmetry",
                self.asymmetry,
                "must be positive and finite",
            ));
        }
        Ok(())
    }

    /// Probability mass left of the location.
    fn left_mass(&self) -> f64 {
        let k2 = self.asymmetry * self.asymmetry;
        k2 / (1.0 + k2)
    }

    pub fn mean(&self) -> f64 {
        let k = self.asymmetry;
        self.location + self.scale * (1.0 / k - k)
    }

    pub(crate) fn draw(&self, rng: &mut Rng) -> f64 {
        let e: f64 = Exp1.sample(rng);
        if rng.random::<f64>() < self.left_mass() {
            self.location - self.scale * self.asymmetry * e
        } else {
            self.location + self.scale / self.asymmetry * e
        }
    }

    pub fn ln_pdf(&self, x: f64) -> f64 {
        let k = self.asymmetry;
        let d = x - self.location;
        let expo = if d >= 0.0 { -k * d } else { d / k };
        expo / self.scale - (self.scale * (k + 1.0 / k)).ln()
    }

    pub fn pdf(&self, x: f64) -> f64 {
        self.ln_pdf(x).exp()
    }

    pub fn cdf(&self, x: f64) -> f64 {
        let k = self.asymmetry;
        let d = x - self.location;
        if d < 0.0 {
            self.left_mass() * (d / (k * self.scale)).exp()
        } else {
            1.0 - (1.0 - self.left_mass()) * (-k * d / self.scale).exp()
        }
    }

    pub fn quantile(&self, p: f64) -> f64 {
        let k = self.asymmetry;
        let left = self.left_mass();
        if p <= left {
            self.location + self.scale * k * (p / left).ln()
        } else {
            self.location - self.scale / k * ((1.0 - p) / (1.0 - left)).ln()
        }
    }
}

/// Result of [`fit_asymmetric_laplace`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymmetricLaplaceFit {
    pub params: AsymmetricLaplaceParams,
    pub mean_log_likelihood: f64,
}

/// Exact maximum-likelihood asymmetric Laplace fit.
///
/// For a fixed location `m` let `A(m)` and `B(m)` be the mean positive and
/// negative parts of `x - m`. Maximizing over scale and asymmetry leaves
/// `-2 ln(√A + √B) - 1` per point; `√A + √B` is concave between order
/// statistics, so the optimal location is a sample point. Then
/// `asymmetry = (B/A)^{1/4}` and `scale = (AB)^{1/4}(√A + √B)`.
pub fn fit_asymmetric_laplace(x: &[f64]) -> Result<AsymmetricLaplaceFit> {
    let n = x.len();
    if n < 3 {
        return Err(Error::insufficient(3, n, "asymmetric Laplace fit"));
    }
    check_finite(x, "x")?;
    let s = stats::sorted(x);
    let total: f64 = s.iter().sum();
    let nf = n as f64;

    let mut below = 0.0;
    let mut best: Option<(f64, f64, f64, f64)> = None; // (objective, m, A, B)
    for (j, &m) in s.iter().enumerate() {
        let above = total - below - m;
        let a = (above - (n - j - 1) as f64 * m) / nf;
        let b = (j as f64 * m - below) / nf;
        below += m;
        if a <= 0.0 || b <= 0.0 {
            continue;
        }
        let obj = a.sqrt() + b.sqrt();
        if best.is_none_or(|t| obj < t.0) {
            best = Some((obj, m, a, b));
        }
    }
    let Some((obj, location, a, b)) = best else {
        return Err(Error::fit(
            "asymmetric_laplace",
            "no location leaves mass on both sides",
            n,
        ));
    };
    let asymmetry = (b / a).powf(0.25);
    let scale = (a * b).powf(0.25) * obj;
    Ok(AsymmetricLaplaceFit {
        params: AsymmetricLaplaceParams::new(location, scale, asymmetry)?,
        mean_log_likelihood: -2.0 * obj.ln() - 1.0,
    })
}

/// Symmetric Laplace fit: median location, mean absolute deviation scale.
pub fn fit_laplace(x: &[f64]) -> Result<AsymmetricLaplaceParams> {
    if x.len() < 2 {
        return Err(Error::insufficient(2, x.len(), "Laplace fit"));
    }
    check_finite(x, "x")?;
    let location = stats::median(x);
    let scale = x.iter().map(|v| (v - location).abs()).sum::<f64>() / x.len() as f64;
    if scale == 0.0 {
        return Err(Error::fit("laplace", "zero dispersion", 0));
    }
    AsymmetricLaplaceParams::laplace(location, scale)
}
