use std::collections::BTreeMap;

use rand::{Rng as _, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use winners::gbm::*;
use winners::rng::SeedTree;
use winners::stats;
use winners::Error;

const DAILY: f64 = 1.0 / 252.0;

#[test]
fn noiseless_growth() {
    let p = GBMParams::new(0.1, 0.0).unwrap();
    let path = simulate_gbm(&p, 1.0, 16, 1.0, 1).unwrap();
    assert!((path.terminal() - 4.953).abs() < 1e-3);
    assert!((path.terminal() - 1.6f64.exp()).abs() < 1e-12);
}

#[test]
fn terminal_expectation() {
    let p = GBMParams::new(0.12, 0.29).unwrap();
    let tree = SeedTree::new(2);
    let xt: Vec<f64> = (0..100_000)
        .map(|i| {
            simulate_gbm_with(&p, 1.0, 16, 1.0, &mut tree.stream(i))
                .unwrap()
                .terminal()
        })
        .collect();
    let se = stats::std_dev(&xt) / (xt.len() as f64).sqrt();
    assert!((stats::mean(&xt) - 1.92f64.exp()).abs() < 3.0 * se);
}

#[test]
fn discounted_paths_are_flat() {
    let p = GBMParams::new(0.12, 0.29).unwrap();
    let tree = SeedTree::new(3);
    let paths: Vec<PricePath> = (0..100_000)
        .map(|i| simulate_gbm_with(&p, 1.0, 16, 1.0, &mut tree.stream(i)).unwrap())
        .collect();
    for t in 1..=16 {
        let d: Vec<f64> = paths
            .iter()
            .map(|x| (-0.12 * t as f64).exp() * x.prices[t])
            .collect();
        let se = stats::std_dev(&d) / (d.len() as f64).sqrt();
        assert!((stats::mean(&d) - 1.0).abs() < 3.0 * se, "t={t}");
    }
}

#[test]
fn seeded_paths_repeat() {
    let p = GBMParams::new(0.12, 0.29).unwrap();
    assert_eq!(
        simulate_gbm(&p, 10.0, 252, DAILY, 4).unwrap(),
        simulate_gbm(&p, 10.0, 252, DAILY, 4).unwrap()
    );
}

#[test]
fn constant_and_drift_only_paths() {
    let flat = estimate_gbm(&PricePath::new(vec![5.0; 17], 1.0).unwrap()).unwrap();
    assert_eq!((flat.sigma_hat, flat.mu_hat), (0.0, 0.0));

    let g: f64 = 0.1;
    let path = PricePath::new((0..=16).map(|t| (g * t as f64).exp()).collect(), 1.0).unwrap();
    let e = estimate_gbm(&path).unwrap();
    assert!((e.sigma_sq_raw - (-6.67e-4)).abs() < 1e-6);
    assert!((e.sigma_sq_raw + g * g / 15.0).abs() < 1e-12);
    assert!(e.clamped && e.sigma_hat == 0.0 && (e.mu_hat - 0.1).abs() < 1e-12);
}

#[test]
fn daily_recovery_study() {
    let p = GBMParams::new(0.12, 0.29).unwrap();
    let tree = SeedTree::new(5);
    let est: Vec<GBMEstimate> = (0..1000)
        .map(|i| {
            estimate_gbm(&simulate_gbm_with(&p, 1.0, 16 * 252, DAILY, &mut tree.stream(i)).unwrap()).unwrap()
        })
        .collect();
    let mu = stats::median(&est.iter().map(|e| e.mu_hat).collect::<Vec<_>>());
    let sigma = stats::median(&est.iter().map(|e| e.sigma_hat).collect::<Vec<_>>());
    assert!((mu - 0.12).abs() < 0.03, "{mu}");
    assert!((sigma - 0.29).abs() < 0.01, "{sigma}");
}

#[test]
fn finer_steps_sharpen_volatility() {
    let p = GBMParams::new(0.12, 0.29).unwrap();
    let rmse = |per_year: usize| {
        let tree = SeedTree::new(per_year as u64);
        let sq: Vec<f64> = (0..300)
            .map(|i| {
                let path =
                    simulate_gbm_with(&p, 1.0, 16 * per_year, 1.0 / per_year as f64, &mut tree.stream(i))
                        .unwrap();
                (estimate_gbm(&path).unwrap().sigma_hat - 0.29).powi(2)
            })
            .collect();
        stats::mean(&sq).sqrt()
    };
    let errs = [rmse(12), rmse(52), rmse(252)];
    assert!(errs[0] > errs[1] && errs[1] > errs[2], "{errs:?}");
}

#[test]
fn clamp_flag_tracks_raw_variance() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for i in 0..500 {
        let p = GBMParams::new(rng.random_range(-0.5..0.5), rng.random_range(0.0..0.05)).unwrap();
        let path = simulate_gbm(&p, 1.0, rng.random_range(3..40), 1.0, i).unwrap();
        for mode in [EstimatorMode::AsPrinted, EstimatorMode::Demeaned] {
            let e = estimate_gbm_with(&path, mode).unwrap();
            assert_eq!(e.clamped, e.sigma_sq_raw < 0.0);
            assert!(e.sigma_hat >= 0.0);
            let total = (path.terminal() / path.x0()).ln() / path.horizon();
            assert!((e.mu_hat - total - 0.5 * e.sigma_hat * e.sigma_hat).abs() < 1e-12);
        }
    }
}

fn synthetic_panel(n: usize, seed: u64) -> BTreeMap<String, PricePath> {
    let tree = SeedTree::new(seed);
    let drift = Normal::new(0.12, 0.06).unwrap();
    (0..n)
        .map(|i| {
            let mut rng = tree.stream(i as u64);
            let p = GBMParams::new(drift.sample(&mut rng), 0.29).unwrap();
            (
                format!("T{i:04}"),
                simulate_gbm_with(&p, 1.0, 16 * 252, DAILY, &mut rng).unwrap(),
            )
        })
        .collect()
}

#[test]
fn synthetic_panel_statistics() {
    let panel = build_panel(&synthetic_panel(500, 7)).unwrap();
    assert_eq!(panel.stats.n, 500);
    assert!((panel.stats.mean_mu - 0.12).abs() < 0.01, "{:?}", panel.stats);
    assert!((panel.stats.mean_sigma - 0.29).abs() < 0.01, "{:?}", panel.stats);
    assert!(panel.drift_fit.is_ok() && panel.vol_fit.is_ok());
    assert!(!panel.any_fit_failed());
    let row = panel.row("SYN");
    assert_eq!(row.n, 500);
    assert!(row.zeta.is_some() && row.gamma_rate.is_some() && row.corr.is_some());
}

/// Unit-step path whose estimates are exactly `(mu, sigma)`: log-returns
/// alternate around their mean so that both sums hit their targets.
fn path_with_estimates(mu: f64, sigma: f64, steps: usize) -> PricePath {
    assert!(steps % 2 == 0);
    let t = steps as f64;
    let total = t * (mu - 0.5 * sigma * sigma);
    let sum_sq = t * sigma * sigma + total * total / (t - 1.0);
    let d = ((sum_sq - total * total / t) / t).sqrt();
    let mut log_x = 0.0;
    let mut prices = vec![1.0];
    for i in 0..steps {
        log_x += total / t + if i % 2 == 0 { d } else { -d };
        prices.push(f64::exp(log_x));
    }
    PricePath::new(prices, 1.0).unwrap()
}

#[test]
fn exact_linear_panel() {
    let paths: BTreeMap<String, PricePath> = (0..12)
        .map(|i| {
            let s = 0.1 + 0.03 * i as f64;
            (format!("L{i:02}"), path_with_estimates(2.0 * s + 0.01, s, 16))
        })
        .collect();
    let panel = build_panel(&paths).unwrap();
    for (_, e) in &panel.estimates {
        assert!((e.mu_hat - 2.0 * e.sigma_hat - 0.01).abs() < 1e-12);
    }
    let reg = panel.regression.as_ref().unwrap();
    assert!(
        (reg.slope - 2.0).abs() < 1e-9 && (reg.intercept - 0.01).abs() < 1e-9,
        "{reg:?}"
    );
    assert!((reg.r2 - 1.0).abs() < 1e-9);
    assert!((panel.correlation.as_ref().unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn two_tickers_are_not_a_panel() {
    let paths: BTreeMap<String, PricePath> = synthetic_panel(2, 8);
    assert!(matches!(build_panel(&paths), Err(Error::InsufficientData { .. })));
}

#[test]
fn panel_ignores_ticker_order() {
    let base = synthetic_panel(40, 9);
    let relabelled: BTreeMap<String, PricePath> = base
        .values()
        .enumerate()
        .map(|(i, p)| (format!("Z{:04}", 1000 - i), p.clone()))
        .collect();
    let (a, b) = (build_panel(&base).unwrap(), build_panel(&relabelled).unwrap());
    assert_eq!(a.stats.n, b.stats.n);
    assert!((a.stats.mean_mu - b.stats.mean_mu).abs() < 1e-12);
    assert!((a.stats.std_mu - b.stats.std_mu).abs() < 1e-12);
    assert!((a.stats.mean_sigma - b.stats.mean_sigma).abs() < 1e-12);
    let (fa, fb) = (a.vol_fit.unwrap().params, b.vol_fit.unwrap().params);
    assert!((fa.shape - fb.shape).abs() < 1e-6 * fa.shape);
    assert!((a.correlation.unwrap() - b.correlation.unwrap()).abs() < 1e-12);
}

#[test]
fn constant_prices_fail_the_fits_but_keep_the_panel() {
    let paths: BTreeMap<String, PricePath> = (0..5)
        .map(|i| {
            (
                format!("C{i}"),
                PricePath::new(vec![3.0 + i as f64; 30], DAILY).unwrap(),
            )
        })
        .collect();
    let panel = build_panel(&paths).unwrap();
    assert!(panel.estimates.iter().all(|(_, e)| e.sigma_hat == 0.0));
    assert!(panel.drift_fit.is_err() && panel.vol_fit.is_err());
    assert!(panel.any_fit_failed());
}
