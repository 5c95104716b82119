//! Price files to total returns, winner contributions, mode estimates,
//! macroscopic log-normal fits and QQ data.

use std::collections::BTreeMap;
use std::io::Read;
use std::path::Path;

use chrono::NaiveDate;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::distributions::{fit_lognormal, Law, LogNormalFit, MomentSummary};
use crate::kde::{Kde, KdeOptions};
use crate::rng::rng_from_seed;
use crate::stats;
use crate::{Error, Result};

/// Validated adjusted-close histories, one series per ticker in date order.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PricePanel {
    pub series: BTreeMap<String, Vec<(NaiveDate, f64)>>,
}

impl PricePanel {
    /// First and last date present anywhere in the panel.
    pub fn window(&self) -> Option<(NaiveDate, NaiveDate)> {
        let first = self
            .series
            .values()
            .filter_map(|s| s.first())
            .map(|p| p.0)
            .min()?;
        let last = self.series.values().filter_map(|s| s.last()).map(|p| p.0).max()?;
        Some((first, last))
    }

    pub fn tickers(&self) -> impl Iterator<Item = &str> {
        self.series.keys().map(String::as_str)
    }
}

/// What [`load_panel`] had to fix up.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct LoadReport {
    pub rows: usize,
    /// Tickers whose rows were not in date order and have been sorted.
    pub resorted: Vec<String>,
}

pub fn load_panel(path: impl AsRef<Path>) -> Result<(PricePanel, LoadReport)> {
    let file = std::fs::File::open(path.as_ref())
        .map_err(|e| Error::Io(format!("{}: {e}", path.as_ref().display())))?;
    read_panel(file)
}

/// Reads `ticker,date,adj_close` rows (header required, extra columns
/// ignored, ISO-8601 dates).
pub fn read_panel<R: Read>(source: R) -> Result<(PricePanel, LoadReport)> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(source);
    let headers = rdr
        .headers()
        .map_err(|e| Error::Parse {
            line: 1,
            message: e.to_string(),
        })?
        .clone();
    let column = |name: &str| {
        headers
            .iter()
            .position(|h| h.eq_ignore_ascii_case(name))
            .ok_or_else(|| Error::Parse {
                line: 1,
                message: format!("missing required column `{name}`"),
            })
    };
    let (ci, di, pi) = (column("ticker")?, column("date")?, column("adj_close")?);

    let mut series: BTreeMap<String, Vec<(NaiveDate, f64)>> = BTreeMap::new();
    let mut report = LoadReport::default();
    let mut seen: std::collections::HashMap<(String, NaiveDate), u64> = Default::default();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| Error::Parse {
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        let field = |i: usize, name: &str| {
            rec.get(i).filter(|s| !s.is_empty()).ok_or_else(|| Error::Parse {
                line,
                message: format!("empty `{name}` field"),
            })
        };
        let ticker = field(ci, "ticker")?;
        let date = NaiveDate::parse_from_str(field(di, "date")?, "%Y-%m-%d").map_err(|e| Error::Parse {
            line,
            message: format!("bad date `{}` for {ticker}: {e}", &rec[di]),
        })?;
        let raw = field(pi, "adj_close")?;
        let price: f64 = raw.parse().map_err(|_| Error::Parse {
            line,
            message: format!("bad price `{raw}` for {ticker}"),
        })?;
        if !(price > 0.0 && price.is_finite()) {
            return Err(Error::Data(format!(
                "line {line}: non-positive price {price} for {ticker} on {date}"
            )));
        }
        if let Some(first) = seen.insert((ticker.to_string(), date), line) {
            return Err(Error::Data(format!(
                "line {line}: duplicate row for {ticker} on {date} (first seen on line {first})"
            )));
        }
        series.entry(ticker.to_string()).or_default().push((date, price));
        report.rows += 1;
    }

    for (ticker, s) in series.iter_mut() {
        if s.windows(2).any(|w| w[1].0 < w[0].0) {
            s.sort_by_key(|p| p.0);
            report.resorted.push(ticker.clone());
        }
    }
    Ok((PricePanel { series }, report))
}

/// Total returns `ρ = X_T / X_0`, one per ticker.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ReturnSample {
    tickers: Vec<String>,
    rho: Vec<f64>,
    pub window: Option<(NaiveDate, NaiveDate)>,
}

impl ReturnSample {
    pub fn new(entries: Vec<(String, f64)>) -> Result<Self> {
        let mut seen = std::collections::HashSet::new();
        for (t, r) in &entries {
            if !(*r > 0.0 && r.is_finite()) {
                return Err(Error::Data(format!("total return {r} for {t} is not positive")));
            }
            if !seen.insert(t.as_str()) {
                return Err(Error::Data(format!("duplicate ticker {t}")));
            }
        }
        let (tickers, rho) = entries.into_iter().unzip();
        Ok(Self {
            tickers,
            rho,
            window: None,
        })
    }

    /// Sample with generated tickers `S0000000, S0000001, ...`.
    pub(crate) fn synthetic(rho: Vec<f64>) -> Self {
        Self {
            tickers: (0..rho.len()).map(|i| format!("S{i:07}")).collect(),
            rho,
            window: None,
        }
    }

    /// Generated tickers; values must be positive.
    pub fn from_values(rho: Vec<f64>) -> Result<Self> {
        if let Some(r) = rho.iter().find(|r| !(**r > 0.0 && r.is_finite())) {
            return Err(Error::Data(format!("total return {r} is not positive")));
        }
        Ok(Self::synthetic(rho))
    }

    pub fn len(&self) -> usize {
        self.rho.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rho.is_empty()
    }

    pub fn rho(&self) -> &[f64] {
        &self.rho
    }

    pub fn tickers(&self) -> &[String] {
        &self.tickers
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.tickers
            .iter()
            .map(String::as_str)
            .zip(self.rho.iter().copied())
    }

    fn retain(&self, keep: impl Fn(f64) -> bool) -> Self {
        let (tickers, rho) = self
            .iter()
            .filter(|(_, r)| keep(*r))
            .map(|(t, r)| (t.to_string(), r))
            .unzip();
        Self {
            tickers,
            rho,
            window: self.window,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Disqualified {
    pub ticker: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReturnsOutcome {
    pub sample: ReturnSample,
    pub disqualified: Vec<Disqualified>,
}

/// Calendar days an observation may sit from a window edge.
pub const ENDPOINT_TOLERANCE_DAYS: i64 = 10;

pub fn total_returns(panel: &PricePanel) -> Result<ReturnsOutcome> {
    let window = panel
        .window()
        .ok_or_else(|| Error::insufficient(1, 0, "price rows"))?;
    total_returns_in(panel, window, ENDPOINT_TOLERANCE_DAYS)
}

/// Total return over `window`, using for each edge the observation nearest
/// to it within `tolerance_days` calendar days. Tickers without such
/// observations are disqualified, with the reason recorded.
pub fn total_returns_in(
    panel: &PricePanel,
    window: (NaiveDate, NaiveDate),
    tolerance_days: i64,
) -> Result<ReturnsOutcome> {
    if window.1 <= window.0 {
        return Err(Error::Data(format!("empty window {}:{}", window.0, window.1)));
    }
    let nearest = |s: &[(NaiveDate, f64)], edge: NaiveDate| {
        s.iter()
            .map(|&(d, p)| ((d - edge).num_days().abs(), d, p))
            .filter(|(gap, _, _)| *gap <= tolerance_days)
            .min_by_key(|(gap, d, _)| (*gap, *d))
    };
    let mut entries = Vec::new();
    let mut disqualified = Vec::new();
    for (ticker, s) in &panel.series {
        let start = nearest(s, window.0);
        let end = nearest(s, window.1);
        match (start, end) {
            (Some((_, d0, x0)), Some((_, d1, x1))) if d1 > d0 => entries.push((ticker.clone(), x1 / x0)),
            _ => disqualified.push(Disqualified {
                ticker: ticker.clone(),
                reason: "insufficient window coverage".into(),
            }),
        }
    }
    if entries.is_empty() {
        return Err(Error::Data(format!(
            "no ticker covers the window {}:{}",
            window.0, window.1
        )));
    }
    let mut sample = ReturnSample::new(entries)?;
    sample.window = Some(window);
    Ok(ReturnsOutcome { sample, disqualified })
}

/// Percentage of the mean return owed to the top `pct` fraction of stocks:
/// `100·(1 − mean(rest)/mean(all))`.
///
/// Excludes `k = max(1, round(pct·n))` returns by rank (capped at `n − 1`),
/// ties broken by descending return then ticker.
pub fn top_contribution(sample: &ReturnSample, pct: f64) -> Result<f64> {
    if !(pct > 0.0 && pct < 1.0) {
        return Err(Error::domain("pct", pct, "must lie strictly between 0 and 1"));
    }
    let n = sample.len();
    if n < 2 {
        return Err(Error::insufficient(2, n, "top contribution"));
    }
    let k = ((pct * n as f64).round() as usize).clamp(1, n - 1);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        sample.rho[b]
            .total_cmp(&sample.rho[a])
            .then_with(|| sample.tickers[a].cmp(&sample.tickers[b]))
    });
    let all = stats::mean(&sample.rho);
    let rest: f64 = order[k..].iter().map(|&i| sample.rho[i]).sum::<f64>() / (n - k) as f64;
    Ok(100.0 * (1.0 - rest / all))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterOutcome {
    pub sample: ReturnSample,
    pub removed: usize,
}

pub const DEFAULT_TAIL_THRESHOLD: f64 = -2.0;

/// Keeps returns with `ln ρ` strictly above `threshold_log`.
pub fn tail_filter(sample: &ReturnSample, threshold_log: f64) -> FilterOutcome {
    let kept = sample.retain(|r| r.ln() > threshold_log);
    FilterOutcome {
        removed: sample.len() - kept.len(),
        sample: kept,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexSummary {
    pub n: usize,
    pub top5: f64,
    pub top10: f64,
    pub top25: f64,
    pub mean: f64,
    pub median: f64,
    /// KDE mode; `None` when the estimate is unstable.
    pub mode: Option<f64>,
    /// Why `mode` is missing.
    pub mode_note: Option<String>,
    pub mean_over_median: f64,
    pub mean_over_mode: Option<f64>,
}

pub fn summarize_index(sample: &ReturnSample) -> Result<IndexSummary> {
    summarize_index_with(sample, &KdeOptions::default())
}

pub fn summarize_index_with(sample: &ReturnSample, kde: &KdeOptions) -> Result<IndexSummary> {
    let n = sample.len();
    if n < 2 {
        return Err(Error::insufficient(2, n, "index summary"));
    }
    let rho = sample.rho();
    let mean = stats::mean(rho);
    let median = stats::median(rho);
    let (mode, mode_note) = match Kde::new(rho, kde) {
        Ok(k) => {
            let r = k.mode_result();
            match r.instability {
                None => (Some(r.mode), None),
                Some(why) => (None, Some(why.to_string())),
            }
        }
        Err(Error::InsufficientData { .. }) => (None, Some("too few returns for a density estimate".into())),
        Err(e) => return Err(e),
    };
    Ok(IndexSummary {
        n,
        top5: top_contribution(sample, 0.05)?,
        top10: top_contribution(sample, 0.10)?,
        top25: top_contribution(sample, 0.25)?,
        mean,
        median,
        mode,
        mode_note,
        mean_over_median: mean / median,
        mean_over_mode: mode.map(|m| mean / m),
    })
}

/// Bootstrap percentile interval of mean/median.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatioInterval {
    pub estimate: f64,
    pub lo: f64,
    pub hi: f64,
    pub stderr: f64,
}

pub fn mean_over_median_ci(rho: &[f64], reps: usize, level: f64, seed: u64) -> Result<RatioInterval> {
    if rho.len() < 2 {
        return Err(Error::insufficient(2, rho.len(), "bootstrap interval"));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::domain("level", level, "must lie strictly between 0 and 1"));
    }
    if reps < 2 {
        return Err(Error::insufficient(2, reps, "bootstrap replicates"));
    }
    let mut rng = rng_from_seed(seed);
    let n = rho.len();
    let mut buf = vec![0.0; n];
    let reps: Vec<f64> = (0..reps)
        .map(|_| {
            let mut sum = 0.0;
            for b in buf.iter_mut() {
                *b = rho[rng.random_range(0..n)];
                sum += *b;
            }
            sum / n as f64 / stats::median_in_place(&mut buf)
        })
        .collect();
    let (lo, hi) = stats::percentile_interval(&reps, level);
    Ok(RatioInterval {
        estimate: stats::mean(rho) / stats::median(rho),
        lo,
        hi,
        stderr: stats::std_dev(&reps),
    })
}

/// Log-normal fit of a (tail-filtered) sample with its closed-form moments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MacroscopicFit {
    pub fit: LogNormalFit,
    pub moments: MomentSummary,
    /// Coefficient of variation `√(e^{σ²} − 1)`.
    pub c: f64,
}

pub fn fit_macroscopic(sample: &ReturnSample) -> Result<MacroscopicFit> {
    let fit = fit_lognormal(sample.rho())?;
    let moments = if fit.degenerate {
        let m = fit.mu.exp();
        MomentSummary {
            mean: m,
            median: m,
            mode: m,
            variance: 0.0,
            coeff_variation: 0.0,
        }
    } else {
        crate::distributions::lognormal_moments(&fit.params()?)?
    };
    Ok(MacroscopicFit {
        fit,
        c: moments.coeff_variation,
        moments,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QqPoint {
    pub theoretical: f64,
    pub empirical: f64,
}

/// Quantile pairs at plotting positions `(i − 0.5)/n`, compared in log space:
/// the empirical side is sorted `ln ρ`; a log-normal law contributes
/// `μ + σ Φ⁻¹(p)`, any other law is taken as a model of `ln ρ` directly.
pub fn qq_data(sample: &ReturnSample, fitted: &Law) -> Result<Vec<QqPoint>> {
    let n = sample.len();
    if n < 10 {
        return Err(Error::insufficient(10, n, "QQ data"));
    }
    fitted.validate()?;
    let mut logs: Vec<f64> = sample.rho().iter().map(|r| r.ln()).collect();
    logs.sort_by(f64::total_cmp);
    Ok(logs
        .into_iter()
        .enumerate()
        .map(|(i, empirical)| {
            let p = (i as f64 + 0.5) / n as f64;
            let theoretical = match fitted {
                Law::LogNormal(l) => l.mu + l.sigma * crate::special::norm_quantile(p),
                other => other.quantile(p),
            };
            QqPoint {
                theoretical,
                empirical,
            }
        })
        .collect())
}

/// Winner-contribution and location statistics for one index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub index: String,
    pub n: usize,
    pub top5: f64,
    pub top10: f64,
    pub top25: f64,
    pub mean: f64,
    pub median: f64,
    pub mode: Option<f64>,
    pub mean_over_median: f64,
    pub mean_over_mode: Option<f64>,
}

impl SummaryRow {
    pub fn new(index: &str, s: &IndexSummary) -> Self {
        Self {
            index: index.to_string(),
            n: s.n,
            top5: s.top5,
            top10: s.top10,
            top25: s.top25,
            mean: s.mean,
            median: s.median,
            mode: s.mode,
            mean_over_median: s.mean_over_median,
            mean_over_mode: s.mean_over_mode,
        }
    }
}

/// Macroscopic log-normal fit for one index after the left-tail filter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitRow {
    pub index: String,
    pub n: usize,
    pub removed: usize,
    pub mu: f64,
    pub sigma: f64,
    pub sigma_sq: f64,
    pub mean: f64,
    pub median: f64,
    pub mode: f64,
    pub c: f64,
    pub degenerate: bool,
}

impl FitRow {
    pub fn new(index: &str, filtered: &FilterOutcome, f: &MacroscopicFit) -> Self {
        Self {
            index: index.to_string(),
            n: filtered.sample.len(),
            removed: filtered.removed,
            mu: f.fit.mu,
            sigma: f.fit.sigma,
            sigma_sq: f.fit.sigma * f.fit.sigma,
            mean: f.moments.mean,
            median: f.moments.median,
            mode: f.moments.mode,
            c: f.c,
            degenerate: f.fit.degenerate,
        }
    }
}
