//! Special functions: standard normal helpers, Owen's T, polygamma.

use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2};

pub use statrs::function::gamma::{digamma, ln_gamma};

use crate::quad::adaptive_simpson;

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

pub fn norm_pdf(z: f64) -> f64 {
    (-0.5 * z * z - LN_SQRT_2PI).exp()
}

pub fn norm_ln_pdf(z: f64) -> f64 {
    -0.5 * z * z - LN_SQRT_2PI
}

pub fn norm_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z * FRAC_1_SQRT_2)
}

/// Standard normal quantile.
pub fn norm_quantile(p: f64) -> f64 {
    if p <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if p >= 1.0 {
        return f64::INFINITY;
    }
    -SQRT_2 * statrs::function::erf::erfc_inv(2.0 * p)
}

/// Mills ratio `(1 - Φ(u)) / φ(u)` for large positive `u`, by continued fraction.
fn mills_upper(u: f64) -> f64 {
    let mut tail = u;
    for k in (1..=80).rev() {
        tail = u + k as f64 / tail;
    }
    1.0 / tail
}

/// `ln Φ(z)`, accurate far into the lower tail.
pub fn norm_ln_cdf(z: f64) -> f64 {
    if z > -5.0 {
        norm_cdf(z).ln()
    } else {
        norm_ln_pdf(z) + mills_upper(-z).ln()
    }
}

/// Inverse Mills ratio `φ(z) / Φ(z)`.
pub fn inv_mills(z: f64) -> f64 {
    if z > -5.0 {
        norm_pdf(z) / norm_cdf(z)
    } else {
        1.0 / mills_upper(-z)
    }
}

/// `(ln Φ(z), φ(z)/Φ(z))` sharing one tail evaluation.
pub fn norm_ln_cdf_and_inv_mills(z: f64) -> (f64, f64) {
    if z > -5.0 {
        let p = norm_cdf(z);
        (p.ln(), norm_pdf(z) / p)
    } else {
        let r = mills_upper(-z);
        (norm_ln_pdf(z) + r.ln(), 1.0 / r)
    }
}

/// Owen's T function `T(h, a) = 1/(2π) ∫₀ᵃ exp(-h²(1+x²)/2) / (1+x²) dx`.
pub fn owen_t(h: f64, a: f64) -> f64 {
    if a == 0.0 {
        return 0.0;
    }
    let sign = a.signum();
    let (h, a) = (h.abs(), a.abs());
    let t = if a <= 1.0 {
        owen_t_integral(h, a)
    } else {
        // T(h,a) + T(ah,1/a) = Φ(h)/2 + Φ(ah)/2 - Φ(h)Φ(ah), valid for h ≥ 0
        let ph = norm_cdf(h);
        let pah = norm_cdf(a * h);
        0.5 * ph + 0.5 * pah - ph * pah - owen_t_integral(a * h, 1.0 / a)
    };
    sign * t
}

fn owen_t_integral(h: f64, a: f64) -> f64 {
    let hh = 0.5 * h * h;
    let f = |x: f64| {
        let s = 1.0 + x * x;
        (-hh * s).exp() / s
    };
    adaptive_simpson(f, 0.0, a, 1e-14) / (2.0 * PI)
}

/// Trigamma function ψ₁(x) for x > 0.
pub fn trigamma(x: f64) -> f64 {
    let mut x = x;
    let mut acc = 0.0;
    while x < 10.0 {
        acc += 1.0 / (x * x);
        x += 1.0;
    }
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    acc + inv
        + 0.5 * inv2
        + inv * inv2 * (1.0 / 6.0 - inv2 * (1.0 / 30.0 - inv2 * (1.0 / 42.0 - inv2 * (1.0 / 30.0))))
}
