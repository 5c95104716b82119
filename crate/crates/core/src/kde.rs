//! Gaussian kernel density estimation and mode search.
//!
//! The density is evaluated on a binned grid (linear binning followed by a
//! truncated Gaussian convolution), the grid maximizer is refined against the
//! exact estimate by golden-section search, and stability is judged by rival
//! peaks and by sensitivity to the bandwidth.

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::optim::golden_max;
use crate::rng::Rng;
use crate::special::norm_pdf;
use crate::stats;
use crate::{Error, Result};

const MIN_POINTS: usize = 5;
const MAX_GRID: usize = 1 << 16;
/// Grid points per bandwidth.
const GRID_PER_H: f64 = 8.0;
/// Kernel support in bandwidths.
const CUTOFF: f64 = 6.0;
const OUTSIDE: u32 = u32::MAX;

/// How the bandwidth and stability checks are chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct KdeOptions {
    /// Fixed bandwidth; `None` selects Scott's rule.
    pub bandwidth: Option<f64>,
    /// Multiplier applied to the selected bandwidth.
    pub bandwidth_scale: f64,
    /// Estimate the density of `ln x` and map the mode back with the
    /// Jacobian `1/x`. Requires positive data.
    pub log_space: bool,
    /// A second local maximum at or above this fraction of the highest one
    /// marks the mode unstable.
    pub rival_peak_ratio: f64,
    /// Relative bandwidth perturbation used for the sensitivity check.
    pub perturbation: f64,
    /// Largest tolerated mode shift under perturbation, in bandwidths.
    pub max_shift: f64,
}

impl Default for KdeOptions {
    fn default() -> Self {
        Self {
            bandwidth: None,
            bandwidth_scale: 1.0,
            log_space: false,
            rival_peak_ratio: 0.95,
            perturbation: 0.2,
            max_shift: 0.5,
        }
    }
}

/// Why a mode was judged unstable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Instability {
    RivalPeak,
    BandwidthSensitive,
}

impl std::fmt::Display for Instability {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Instability::RivalPeak => "rival density peak within tolerance",
            Instability::BandwidthSensitive => "mode sensitive to bandwidth",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KDEModeResult {
    pub mode: f64,
    /// Bandwidth used, in the units of the estimation space (log units when
    /// `log_space` is set).
    pub bandwidth: f64,
    pub stable: bool,
    pub instability: Option<Instability>,
}

/// Scott's rule with the robust spread `min(sd, IQR/1.349)`.
///
/// Falls back to the standard deviation when the IQR vanishes. Returns 0 for
/// data without dispersion.
pub fn scott_bandwidth(x: &[f64]) -> f64 {
    let s = stats::sorted(x);
    scott_sorted(&s)
}

fn scott_sorted(s: &[f64]) -> f64 {
    let n = s.len();
    if n < 2 {
        return 0.0;
    }
    let sd = stats::std_dev(s);
    let iqr = stats::quantile_sorted(s, 0.75) - stats::quantile_sorted(s, 0.25);
    let spread = if iqr > 0.0 { sd.min(iqr / 1.349) } else { sd };
    1.059 * spread * (n as f64).powf(-0.2)
}

pub fn kde_mode(x: &[f64]) -> Result<KDEModeResult> {
    kde_mode_with(x, &KdeOptions::default())
}

pub fn kde_mode_with(x: &[f64], opts: &KdeOptions) -> Result<KDEModeResult> {
    let kde = Kde::new(x, opts)?;
    Ok(kde.mode_result())
}

/// Prepared kernel density estimate over one sample.
///
/// Keeps the sorted (possibly log-transformed) data and the binned grid so
/// that the mode, its sensitivity and bootstrap replicates can be computed
/// without repeating the setup.
#[derive(Debug, Clone)]
pub struct Kde {
    data: Vec<f64>,
    h: f64,
    log_space: bool,
    opts: KdeOptions,
    grid: Option<Grid>,
}

#[derive(Debug, Clone)]
struct Grid {
    lo: f64,
    step: f64,
    len: usize,
    /// Left bin and its weight per data point; `OUTSIDE` for points beyond
    /// the (trimmed) grid.
    slots: Vec<(u32, f64)>,
}

impl Kde {
    pub fn new(x: &[f64], opts: &KdeOptions) -> Result<Self> {
        if x.len() < MIN_POINTS {
            return Err(Error::insufficient(MIN_POINTS, x.len(), "kernel density mode"));
        }
        if let Some(bad) = x.iter().find(|v| !v.is_finite()) {
            return Err(Error::domain("x", *bad, "sample values must be finite"));
        }
        if !(opts.bandwidth_scale > 0.0 && opts.bandwidth_scale.is_finite()) {
            return Err(Error::domain(
                "bandwidth_scale",
                opts.bandwidth_scale,
                "must be positive",
            ));
        }
        let mut data: Vec<f64> = if opts.log_space {
            if let Some(bad) = x.iter().find(|v| **v <= 0.0) {
                return Err(Error::domain("x", *bad, "log-space density needs positive data"));
            }
            x.iter().map(|v| v.ln()).collect()
        } else {
            x.to_vec()
        };
        data.sort_by(f64::total_cmp);

        let base = match opts.bandwidth {
            Some(h) if h >= 0.0 && h.is_finite() => h,
            Some(h) => return Err(Error::domain("bandwidth", h, "must be non-negative")),
            None => scott_sorted(&data),
        };
        let h = base * opts.bandwidth_scale;
        let grid = (h > 0.0 && data[data.len() - 1] > data[0]).then(|| Grid::new(&data, h));
        Ok(Self {
            data,
            h,
            log_space: opts.log_space,
            opts: *opts,
            grid,
        })
    }

    pub fn bandwidth(&self) -> f64 {
        self.h
    }

    /// Density at `x` (in the original units).
    pub fn density(&self, x: f64) -> f64 {
        if self.h == 0.0 {
            return f64::NAN;
        }
        if self.log_space {
            if x <= 0.0 {
                return 0.0;
            }
            self.exact(x.ln(), self.h) / x
        } else {
            self.exact(x, self.h)
        }
    }

    /// Kernel estimate in the estimation space, with bandwidth `h`.
    fn exact(&self, t: f64, h: f64) -> f64 {
        let reach = CUTOFF * h;
        let a = self.data.partition_point(|v| *v < t - reach);
        let b = self.data.partition_point(|v| *v <= t + reach);
        let s: f64 = self.data[a..b].iter().map(|v| norm_pdf((t - v) / h)).sum();
        s / (self.data.len() as f64 * h)
    }

    /// Objective maximized by the mode: density in the original units,
    /// expressed as a function of the estimation-space coordinate.
    fn target(&self, t: f64, h: f64) -> f64 {
        let f = self.exact(t, h);
        if self.log_space {
            f * (-t).exp()
        } else {
            f
        }
    }

    fn to_original(&self, t: f64) -> f64 {
        if self.log_space {
            t.exp()
        } else {
            t
        }
    }

    /// Full result with stability diagnostics.
    pub fn mode_result(&self) -> KDEModeResult {
        let Some(grid) = &self.grid else {
            // No dispersion: the sample is a point mass.
            return KDEModeResult {
                mode: self.to_original(self.data[0]),
                bandwidth: self.h,
                stable: true,
                instability: None,
            };
        };
        let (t, rival) = self.refined_mode(grid, self.h);
        let mut instability = None;
        if rival >= self.opts.rival_peak_ratio {
            instability = Some(Instability::RivalPeak);
        } else {
            let eps = self.opts.perturbation;
            for factor in [1.0 - eps, 1.0 + eps] {
                let hp = self.h * factor;
                let (tp, _) = self.refined_mode(&Grid::new(&self.data, hp), hp);
                if (tp - t).abs() > self.opts.max_shift * self.h {
                    instability = Some(Instability::BandwidthSensitive);
                    break;
                }
            }
        }
        KDEModeResult {
            mode: self.to_original(t),
            bandwidth: self.h,
            stable: instability.is_none(),
            instability,
        }
    }

    /// Mode in estimation space plus the ratio of the runner-up peak.
    fn refined_mode(&self, grid: &Grid, h: f64) -> (f64, f64) {
        let counts = grid.counts(self.data.len(), |i| i);
        let dens = self.grid_target(grid, &counts, h);
        let (i, rival) = peaks(&dens);
        let x = grid.lo + i as f64 * grid.step;
        let lo = (x - grid.step).max(self.data[0]);
        let hi = (x + grid.step).min(self.data[self.data.len() - 1]);
        let (t, ft) = golden_max(|t| self.target(t, h), lo, hi, 1e-10 * (1.0 + x.abs()));
        // Guard against the refinement losing to the grid point itself.
        if self.target(x, h) > ft && (self.data[0]..=self.data[self.data.len() - 1]).contains(&x) {
            (x, rival)
        } else {
            (t, rival)
        }
    }

    /// Binned estimate of the mode objective on the grid.
    fn grid_target(&self, grid: &Grid, counts: &[f64], h: f64) -> Vec<f64> {
        let mut dens = grid.convolve(counts, h);
        if self.log_space {
            for (i, d) in dens.iter_mut().enumerate() {
                *d *= (-(grid.lo + i as f64 * grid.step)).exp();
            }
        }
        dens
    }

    /// Grid-level mode: parabolic interpolation around the highest bin.
    fn grid_mode(&self, grid: &Grid, counts: &[f64]) -> f64 {
        let dens = self.grid_target(grid, counts, self.h);
        let (i, _) = peaks(&dens);
        let mut offset = 0.0;
        if i > 0 && i + 1 < dens.len() {
            let (a, b, c) = (dens[i - 1], dens[i], dens[i + 1]);
            let denom = a - 2.0 * b + c;
            if denom < 0.0 {
                offset = (0.5 * (a - c) / denom).clamp(-0.5, 0.5);
            }
        }
        self.to_original(grid.lo + (i as f64 + offset) * grid.step)
    }

    /// Bootstrap standard error of the mode, in original units.
    ///
    /// Each replicate resamples the data with replacement and takes the
    /// grid-level mode at the original bandwidth.
    pub fn bootstrap_se(&self, reps: usize, rng: &mut Rng) -> f64 {
        let Some(grid) = &self.grid else {
            return 0.0;
        };
        if reps < 2 {
            return f64::NAN;
        }
        let n = self.data.len();
        let modes: Vec<f64> = (0..reps)
            .map(|_| {
                let counts = grid.counts(n, |_| rng.random_range(0..n));
                self.grid_mode(grid, &counts)
            })
            .collect();
        stats::std_dev(&modes)
    }
}

impl Grid {
    fn new(sorted: &[f64], h: f64) -> Self {
        let n = sorted.len();
        let pad = CUTOFF * h;
        let mut lo = sorted[0] - pad;
        let mut hi = sorted[n - 1] + pad;
        let mut step = h / GRID_PER_H;
        if (hi - lo) / step >= MAX_GRID as f64 {
            // Very long tails: the mode sits in the bulk, so trim the range.
            lo = stats::quantile_sorted(sorted, 0.001) - pad;
            hi = stats::quantile_sorted(sorted, 0.999) + pad;
            step = step.max((hi - lo) / (MAX_GRID - 1) as f64);
        }
        let len = ((hi - lo) / step).ceil() as usize + 1;
        let slots = sorted
            .iter()
            .map(|&v| {
                let pos = (v - lo) / step;
                if pos < 0.0 || pos >= (len - 1) as f64 {
                    return (OUTSIDE, 0.0);
                }
                let j = pos.floor();
                (j as u32, 1.0 - (pos - j))
            })
            .collect();
        Self { lo, step, len, slots }
    }

    /// Linear-binning counts for draws `0..n`, each mapped to a data index.
    ///
    /// Data outside the grid are dropped from the binned estimate (they lie
    /// beyond the kernel reach of every grid point kept).
    fn counts(&self, n: usize, mut pick: impl FnMut(usize) -> usize) -> Vec<f64> {
        let mut c = vec![0.0; self.len];
        for d in 0..n {
            let (j, w) = self.slots[pick(d)];
            if j != OUTSIDE {
                c[j as usize] += w;
                c[j as usize + 1] += 1.0 - w;
            }
        }
        c
    }

    fn convolve(&self, counts: &[f64], h: f64) -> Vec<f64> {
        let reach = ((CUTOFF * h) / self.step).ceil() as usize;
        let kernel: Vec<f64> = (0..=reach).map(|j| norm_pdf(j as f64 * self.step / h)).collect();
        let norm = 1.0 / (self.slots.len() as f64 * h);
        let g = self.len;
        let mut out = vec![0.0; g];
        for (i, &c) in counts.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            let a = i.saturating_sub(reach);
            let b = (i + reach).min(g - 1);
            for (j, o) in out[a..=b].iter_mut().enumerate() {
                *o += c * kernel[(a + j).abs_diff(i)];
            }
        }
        for o in &mut out {
            *o *= norm;
        }
        out
    }
}

/// Index of the highest grid value and the ratio of the runner-up local
/// maximum to it (0 when there is a single peak).
fn peaks(dens: &[f64]) -> (usize, f64) {
    let mut best = 0;
    for (i, d) in dens.iter().enumerate() {
        if *d > dens[best] {
            best = i;
        }
    }
    let top = dens[best];
    let mut rival: f64 = 0.0;
    for i in 1..dens.len().saturating_sub(1) {
        if i != best && dens[i] > dens[i - 1] && dens[i] >= dens[i + 1] {
            rival = rival.max(dens[i] / top);
        }
    }
    (best, rival)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::{sample, Law, LogNormalParams, NormalParams};

    #[test]
    fn point_mass() {
        let r = kde_mode(&[1.0; 5]).unwrap();
        assert_eq!(r.mode, 1.0);
        assert_eq!(r.bandwidth, 0.0);
        assert!(r.stable);
    }

    #[test]
    fn too_few_points() {
        assert!(matches!(
            kde_mode(&[1.0, 2.0, 3.0, 4.0]),
            Err(Error::InsufficientData { needed: 5, .. })
        ));
    }

    #[test]
    fn normal_mode() {
        let x = sample(&Law::Normal(NormalParams::new(3.0, 1.0).unwrap()), 100_000, 1).unwrap();
        let r = kde_mode(&x).unwrap();
        assert!((r.mode - 3.0).abs() < 0.05, "{r:?}");
        assert!(r.stable);
    }

    #[test]
    fn binned_matches_exact() {
        let x = sample(&Law::Normal(NormalParams::new(0.0, 1.0).unwrap()), 2_000, 3).unwrap();
        let kde = Kde::new(&x, &KdeOptions::default()).unwrap();
        let grid = kde.grid.as_ref().unwrap();
        let counts = grid.counts(x.len(), |i| i);
        let dens = grid.convolve(&counts, kde.h);
        for i in (0..grid.len).step_by(37) {
            let t = grid.lo + i as f64 * grid.step;
            assert!((dens[i] - kde.exact(t, kde.h)).abs() < 2e-3, "at {t}");
        }
    }

    #[test]
    fn bimodal_is_unstable() {
        let mut x = sample(&Law::Normal(NormalParams::new(-3.0, 1.0).unwrap()), 5_000, 4).unwrap();
        x.extend(sample(&Law::Normal(NormalParams::new(3.0, 1.0).unwrap()), 5_000, 5).unwrap());
        let r = kde_mode(&x).unwrap();
        assert!(!r.stable);
        assert_eq!(r.instability, Some(Instability::RivalPeak));
    }

    #[test]
    fn log_space_mode() {
        let p = LogNormalParams::new(0.0, 0.5).unwrap();
        let x = sample(&Law::LogNormal(p), 100_000, 6).unwrap();
        let opts = KdeOptions {
            log_space: true,
            ..KdeOptions::default()
        };
        let r = kde_mode_with(&x, &opts).unwrap();
        assert!((r.mode - (-0.25f64).exp()).abs() < 0.03, "{r:?}");
    }

    #[test]
    fn bootstrap_se_is_small_for_large_samples() {
        let x = sample(&Law::Normal(NormalParams::new(0.0, 1.0).unwrap()), 20_000, 7).unwrap();
        let kde = Kde::new(&x, &KdeOptions::default()).unwrap();
        let se = kde.bootstrap_se(50, &mut crate::rng::rng_from_seed(1));
        assert!(se > 0.0 && se < 0.1, "{se}");
    }
}
