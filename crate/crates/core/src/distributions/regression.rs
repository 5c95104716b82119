use serde::{Deserialize, Serialize};

use super::check_finite;
use crate::error::{Error, Result};
use crate::stats;

/// Huber tuning constant, in units of the robust residual scale.
pub const HUBER_TUNING: f64 = 1.345;

// MAD of a normal sample divided by this constant estimates sigma.
const MAD_NORMAL: f64 = 0.674_489_750_196_081_7;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HuberFit {
    /// Slope `a` of `y ≈ a·x + b`.
    pub slope: f64,
    pub intercept: f64,
    /// `1 - SS_res/SS_tot` of the robust line over all points; may be negative.
    pub r2: f64,
    /// Robust residual scale at convergence.
    pub scale: f64,
    pub iterations: usize,
}

/// Robust line fit with Huber loss by iteratively reweighted least squares.
///
/// Each iteration re-estimates the residual scale as MAD/0.6745 and
/// down-weights residuals beyond `1.345·scale`.
pub fn huber_regression(x: &[f64], y: &[f64]) -> Result<HuberFit> {
    check_pair(x, y, 3, "Huber regression")?;
    let ones = vec![1.0; x.len()];
    let (mut a, mut b) = weighted_line(x, y, &ones)?;
    let y_scale = y.iter().map(|v| v.abs()).sum::<f64>() / y.len() as f64;
    let floor = f64::EPSILON * (1.0 + y_scale);

    let mut resid = vec![0.0; x.len()];
    let mut weights = ones;
    let mut scale = 0.0;
    const MAX_ITER: usize = 200;
    for iter in 1..=MAX_ITER {
        for ((r, xi), yi) in resid.iter_mut().zip(x).zip(y) {
            *r = yi - (a * xi + b);
        }
        scale = mad(&resid) / MAD_NORMAL;
        let cut = HUBER_TUNING * scale.max(floor);
        for (w, r) in weights.iter_mut().zip(&resid) {
            *w = if r.abs() <= cut { 1.0 } else { cut / r.abs() };
        }
        let (na, nb) = weighted_line(x, y, &weights)?;
        let change = (na - a).abs() + (nb - b).abs();
        a = na;
        b = nb;
        if change <= 1e-12 * (1.0 + a.abs() + b.abs()) {
            return Ok(HuberFit {
                slope: a,
                intercept: b,
                r2: r_squared(x, y, a, b),
                scale,
                iterations: iter,
            });
        }
    }
    Err(Error::fit(
        "huber",
        format!("reweighting did not settle (scale {scale:.3e})"),
        MAX_ITER,
    ))
}

/// Pearson correlation coefficient, clamped to `[-1, 1]`.
pub fn pearson_correlation(x: &[f64], y: &[f64]) -> Result<f64> {
    check_pair(x, y, 2, "correlation")?;
    let (mx, my) = (stats::mean(x), stats::mean(y));
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (xi, yi) in x.iter().zip(y) {
        let (dx, dy) = (xi - mx, yi - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 {
        return Err(Error::domain("x", 0.0, "zero dispersion"));
    }
    if syy == 0.0 {
        return Err(Error::domain("y", 0.0, "zero dispersion"));
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

fn check_pair(x: &[f64], y: &[f64], min: usize, context: &'static str) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::Data(format!(
            "{context}: length mismatch ({} vs {})",
            x.len(),
            y.len()
        )));
    }
    if x.len() < min {
        return Err(Error::insufficient(min, x.len(), context));
    }
    check_finite(x, "x")?;
    check_finite(y, "y")
}

fn weighted_line(x: &[f64], y: &[f64], w: &[f64]) -> Result<(f64, f64)> {
    let sw: f64 = w.iter().sum();
    let mx = x.iter().zip(w).map(|(v, w)| v * w).sum::<f64>() / sw;
    let my = y.iter().zip(w).map(|(v, w)| v * w).sum::<f64>() / sw;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for ((xi, yi), wi) in x.iter().zip(y).zip(w) {
        sxy += wi * (xi - mx) * (yi - my);
        sxx += wi * (xi - mx) * (xi - mx);
    }
    let spread = x.iter().map(|v| (v - mx).abs()).fold(0.0, f64::max);
    if sxx.is_nan() || sxx <= 0.0 || spread == 0.0 || sxx <= 1e-24 * sw * spread * spread {
        return Err(Error::fit("huber", "degenerate x (no dispersion)", 0));
    }
    let a = sxy / sxx;
    Ok((a, my - a * mx))
}

fn mad(r: &[f64]) -> f64 {
    let med = stats::median(r);
    let mut dev: Vec<f64> = r.iter().map(|v| (v - med).abs()).collect();
    stats::median_in_place(&mut dev)
}

fn r_squared(x: &[f64], y: &[f64], a: f64, b: f64) -> f64 {
    let my = stats::mean(y);
    let ss_tot: f64 = y.iter().map(|v| (v - my).powi(2)).sum();
    let ss_res: f64 = x.iter().zip(y).map(|(xi, yi)| (yi - a * xi - b).powi(2)).sum();
    if ss_tot == 0.0 {
        return if ss_res == 0.0 { 1.0 } else { f64::NEG_INFINITY };
    }
    1.0 - ss_res / ss_tot
}
