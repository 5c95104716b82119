use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use winners::distributions::{
    fit_gamma, fit_skew_normal, huber_regression, sample, GammaParams, Law, LogNormalParams, SkewNormalParams,
};
use winners::gbm::{estimate_gbm, simulate_gbm, GBMParams};
use winners::kde::{kde_mode, kde_mode_with, KdeOptions};
use winners::lognormal_sum::mc_typical_mean;

fn kde(c: &mut Criterion) {
    let law = Law::LogNormal(LogNormalParams::new(0.95, 1.02).unwrap());
    let mut g = c.benchmark_group("kde_mode");
    for n in [1_000, 10_000, 100_000] {
        let x = sample(&law, n, 1).unwrap();
        g.bench_with_input(BenchmarkId::new("linear", n), &x, |b, x| {
            b.iter(|| kde_mode(black_box(x)).unwrap())
        });
        let log = KdeOptions {
            log_space: true,
            ..KdeOptions::default()
        };
        g.bench_with_input(BenchmarkId::new("log", n), &x, |b, x| {
            b.iter(|| kde_mode_with(black_box(x), &log).unwrap())
        });
    }
    g.finish();
}

fn typical_mean(c: &mut Criterion) {
    let p = LogNormalParams::new(0.95, 1.02).unwrap();
    let mut g = c.benchmark_group("mc_typical_mean");
    g.sample_size(10);
    for n in [1u64, 16, 256] {
        g.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, &n| {
            b.iter(|| mc_typical_mean(&p, n, 10_000, 2).unwrap())
        });
    }
    g.finish();
}

fn fits(c: &mut Criterion) {
    let sn = sample(
        &Law::SkewNormal(SkewNormalParams::new(0.06, 0.09, 1.88).unwrap()),
        500,
        3,
    )
    .unwrap();
    let ga = sample(&Law::Gamma(GammaParams::new(4.3, 14.7).unwrap()), 500, 4).unwrap();
    let y: Vec<f64> = ga.iter().zip(&sn).map(|(s, e)| 0.6 * s + 0.2 * e).collect();
    let mut g = c.benchmark_group("fit");
    g.bench_function("skew_normal_500", |b| {
        b.iter(|| fit_skew_normal(black_box(&sn)).unwrap())
    });
    g.bench_function("gamma_500", |b| b.iter(|| fit_gamma(black_box(&ga)).unwrap()));
    g.bench_function("huber_500", |b| {
        b.iter(|| huber_regression(black_box(&ga), black_box(&y)).unwrap())
    });
    g.finish();
}

fn gbm(c: &mut Criterion) {
    let path = simulate_gbm(
        &GBMParams::new(0.12, 0.29).unwrap(),
        1.0,
        16 * 252,
        1.0 / 252.0,
        5,
    )
    .unwrap();
    c.bench_function("estimate_gbm_16y_daily", |b| {
        b.iter(|| estimate_gbm(black_box(&path)).unwrap())
    });
}

criterion_group!(benches, kde, typical_mean, fits, gbm);
criterion_main!(benches);
