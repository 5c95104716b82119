use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use chrono::{Duration, NaiveDate};
use winners::distributions::{sample, Law, LogNormalParams};
use winners::empirical::mean_over_median_ci;
use winners::gbm::{simulate_gbm, GBMParams};

fn winners(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_winners"))
        .args(args)
        .output()
        .unwrap()
}

fn fixture(name: &str) -> String {
    format!("{}/tests/fixtures/{name}", env!("CARGO_MANIFEST_DIR"))
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

/// Data rows of a CSV report as header-keyed maps, skipping comment records.
/// A comment on an unterminated last line would read as a record, so the
/// text is re-terminated after splitting.
fn rows(text: &str) -> Vec<std::collections::HashMap<String, String>> {
    let text = format!("{}\n", text.trim_end());
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let header = rdr.headers().unwrap().clone();
    rdr.records()
        .map(|r| {
            header
                .iter()
                .map(String::from)
                .zip(r.unwrap().iter().map(String::from))
                .collect()
        })
        .collect()
}

fn num(row: &std::collections::HashMap<String, String>, key: &str) -> f64 {
    row[key]
        .parse()
        .unwrap_or_else(|_| panic!("{key} = `{}`", row[key]))
}

fn start() -> NaiveDate {
    NaiveDate::from_ymd_opt(2006, 1, 3).unwrap()
}

/// Two-observation panel: every ticker starts at 1 and ends at its return.
fn write_return_panel(path: &Path, rho: &[f64]) {
    let end = start() + Duration::days(5841);
    let mut csv = String::from("ticker,date,adj_close\n");
    for (i, r) in rho.iter().enumerate() {
        writeln!(csv, "T{i:04},{},1\nT{i:04},{end},{r}", start()).unwrap();
    }
    std::fs::write(path, csv).unwrap();
}

fn write_paths(path: &Path, paths: &[Vec<f64>]) {
    let mut csv = String::from("ticker,date,adj_close\n");
    for (i, prices) in paths.iter().enumerate() {
        for (d, p) in prices.iter().enumerate() {
            writeln!(csv, "P{i:04},{},{p}", start() + Duration::days(d as i64)).unwrap();
        }
    }
    std::fs::write(path, csv).unwrap();
}

#[test]
fn analyze_fixture() {
    let o = winners(&["analyze", "--input", &fixture("three_tickers.csv")]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    let (summary, fits) = text.split_once("\n\n").unwrap();
    let s = rows(summary);
    assert_eq!(s.len(), 1);
    assert_eq!(s[0]["index"], "three_tickers");
    assert_eq!(s[0]["n"], "3");
    assert!((num(&s[0], "mean") - 7.0 / 3.0).abs() < 1e-12);
    assert_eq!(rows(fits).len(), 1);
}

#[test]
fn analyze_bad_row() {
    let o = winners(&["analyze", "--input", &fixture("bad_row.csv")]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("line 5") && err.contains("BBB"), "{err}");
    assert!(o.stdout.is_empty());
}

#[test]
fn analyze_missing_input() {
    assert_eq!(
        winners(&["analyze", "--input", "/no/such/file.csv"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(winners(&["analyze"]).status.code(), Some(2));
}

#[test]
fn analyze_synthetic_lognormal_panel() {
    let dir = tempfile::tempdir().unwrap();
    let law = Law::LogNormal(LogNormalParams::new(0.95, 1.02).unwrap());
    let rho = sample(&law, 500, 21).unwrap();
    let input = dir.path().join("synthetic.csv");
    write_return_panel(&input, &rho);
    let out = dir.path().join("reports");
    let o = winners(&[
        "analyze",
        "--input",
        input.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));

    let summary = rows(&std::fs::read_to_string(out.join("summary.csv")).unwrap());
    let ratio = num(&summary[0], "mean_over_median");
    let ci = mean_over_median_ci(&rho, 1000, 0.95, 22).unwrap();
    assert!((ratio - ci.estimate).abs() < 1e-9);
    let target = (0.5f64 * 1.02 * 1.02).exp();
    assert!(ci.lo <= target && target <= ci.hi, "{ci:?}");

    let fits = rows(&std::fs::read_to_string(out.join("fits.csv")).unwrap());
    assert!((num(&fits[0], "mu") - 0.95).abs() < 0.15);
    assert!((num(&fits[0], "sigma") - 1.02).abs() < 0.1);
}

#[test]
fn regime_curve_matches_closed_form() {
    let o = winners(&[
        "regime", "--mu", "0.95", "--sigma", "1.02", "--max-n", "1024", "--reps", "100000", "--seed", "3",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let pts = rows(&stdout(&o));
    assert_eq!(pts.len(), 11);
    for p in &pts {
        let (a, m, se) = (num(p, "ratio_analytic"), num(p, "ratio_mc"), num(p, "mc_stderr"));
        assert!(
            (m - a).abs() <= (3.0 * se).max(0.03),
            "n={}: {m} ± {se} vs {a}",
            p["n"]
        );
    }
}

#[test]
fn regime_narrow_is_flat() {
    let o = winners(&["regime", "--sigma", "0.0001"]);
    assert!(o.status.success());
    let pts = rows(&stdout(&o));
    assert!(pts.iter().all(|p| (num(p, "ratio_analytic") - 1.0).abs() < 1e-6));
    assert!(stdout(&o).lines().next().unwrap().contains("regime=narrow"));
}

#[test]
fn regime_needs_parameters_and_seed() {
    let o = winners(&["regime"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("Usage: winners regime"), "{}", stderr(&o));

    let o = winners(&["regime", "--sigma", "1", "--reps", "10000"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--seed"));

    assert_eq!(winners(&["regime", "--sigma", "-1"]).status.code(), Some(2));
}

#[test]
fn regime_reads_fit_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r");
    let o = winners(&[
        "analyze",
        "-i",
        &fixture("three_tickers.csv"),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let fits = out.join("fits.csv");
    let o = winners(&["regime", "--params", fits.to_str().unwrap(), "--grid", "1,4"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let fit = rows(&std::fs::read_to_string(&fits).unwrap());
    let header = stdout(&o).lines().next().unwrap().to_string();
    assert!(
        header.contains("index=three_tickers") && header.contains(&format!("sigma={}", fit[0]["sigma"])),
        "{header}"
    );
}

#[test]
fn reports_are_reproducible_and_labelled() {
    let dir = tempfile::tempdir().unwrap();
    let run = |sub: &str| {
        let out = dir.path().join(sub);
        let o = winners(&[
            "regime",
            "--sigma",
            "0.8",
            "--grid",
            "2,8",
            "--reps",
            "20000",
            "--seed",
            "9",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert!(o.status.success());
        std::fs::read(out.join("regime.csv")).unwrap()
    };
    let (a, b) = (run("a"), run("b"));
    assert_eq!(a, b);
    let header = String::from_utf8(a).unwrap().lines().next().unwrap().to_string();
    for key in ["version=", "seed=9", "reps=20000"] {
        assert!(header.starts_with('#') && header.contains(key), "{header}");
    }
}

#[test]
fn gbm_recovers_generator() {
    let dir = tempfile::tempdir().unwrap();
    let p = GBMParams::new(0.12, 0.29).unwrap();
    let paths: Vec<Vec<f64>> = (0..100)
        .map(|i| simulate_gbm(&p, 50.0, 4 * 252, 1.0 / 252.0, i).unwrap().prices)
        .collect();
    let input = dir.path().join("gbm.csv");
    write_paths(&input, &paths);
    let o = winners(&["gbm", "--input", input.to_str().unwrap(), "--estimates"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    let (panel, estimates) = text.split_once("\n\n").unwrap();
    let row = &rows(panel)[0];
    assert_eq!(row["n"], "100");
    assert!((num(row, "mean_sigma") - 0.29).abs() < 0.01, "{row:?}");
    assert!((num(row, "mean_mu") - 0.12).abs() < 0.05, "{row:?}");
    assert_eq!(rows(estimates).len(), 100);
    assert!(panel.trim_end().ends_with("# clamped=0 estimates=100"), "{panel}");
}

#[test]
fn gbm_constant_prices_fail_the_fits() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("flat.csv");
    write_paths(
        &input,
        &(0..6).map(|i| vec![10.0 + i as f64; 40]).collect::<Vec<_>>(),
    );
    let out = dir.path().join("r");
    let o = winners(&[
        "gbm",
        "--input",
        input.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(stderr(&o).contains("drift_fit"), "{}", stderr(&o));
    let row = &rows(&std::fs::read_to_string(out.join("panel.csv")).unwrap())[0];
    assert_eq!(num(row, "mean_sigma"), 0.0);
    assert_eq!(row["zeta"], "");
}

#[test]
fn gbm_deterministic_growth_is_all_clamped() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("growth.csv");
    let paths: Vec<Vec<f64>> = (0..5)
        .map(|i| {
            (0..60)
                .map(|t| (0.001 * (i + 1) as f64 * t as f64).exp())
                .collect()
        })
        .collect();
    write_paths(&input, &paths);
    let o = winners(&["gbm", "--input", input.to_str().unwrap()]);
    let text = stdout(&o);
    assert!(text.trim_end().ends_with("# clamped=5 estimates=5"), "{text}");
    assert_eq!(rows(&text)[0]["clamped"], "5");
}

#[test]
fn model_closed_form() {
    let o = winners(&[
        "model",
        "--mu-d",
        "0.12",
        "--sigma-d",
        "0.03",
        "--sigma",
        "0.1",
        "--horizon",
        "16",
    ]);
    assert!(o.status.success());
    let r = &rows(&stdout(&o))[0];
    assert!((num(r, "mean_over_median") - 0.1952f64.exp()).abs() < 1e-12);
    assert!((num(r, "mean_over_median") - 1.216).abs() < 1e-3);
    assert!((num(r, "mean_over_mode") - 1.796).abs() < 1e-3);

    let flat = winners(&[
        "model",
        "--mu-d",
        "0.1",
        "--sigma-d",
        "0",
        "--sigma",
        "0",
        "--T",
        "5",
    ]);
    let r = &rows(&stdout(&flat))[0];
    assert_eq!((num(r, "mean_over_median"), num(r, "mean_over_mode")), (1.0, 1.0));

    assert_eq!(winners(&["model", "--mu-d", "0.1"]).status.code(), Some(2));
    assert_eq!(
        winners(&[
            "model",
            "--mu-d",
            "0.1",
            "--sigma-d",
            "-1",
            "--sigma",
            "0",
            "--T",
            "5"
        ])
        .status
        .code(),
        Some(2)
    );
}

#[test]
fn model_simulation_agrees() {
    let o = winners(&[
        "model",
        "--mu-d",
        "0.12",
        "--sigma-d",
        "0.03",
        "--sigma",
        "0.1",
        "--T",
        "16",
        "--simulate",
        "100000",
        "--seed",
        "4",
        "--format",
        "json",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let r = &v["rows"][0];
    let (mc, se, cf) = (
        r["mc_mean_over_median"].as_f64().unwrap(),
        r["mc_stderr"].as_f64().unwrap(),
        r["mean_over_median"].as_f64().unwrap(),
    );
    assert!((mc - cf).abs() < 3.0 * se, "{mc} ± {se} vs {cf}");
    assert_eq!(v["meta"]["seed"], 4);
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg: PathBuf = dir.path().join("run.toml");
    std::fs::write(
        &cfg,
        "seed = 5\n\n[model]\nmu_d = 0.12\nsigma_d = 0.03\nsigma = 0.1\nT = 16\n",
    )
    .unwrap();
    let cfg = cfg.to_str().unwrap();

    let from_file = rows(&stdout(&winners(&["model", "--config", cfg])))[0].clone();
    assert!((num(&from_file, "mean_over_median") - 0.1952f64.exp()).abs() < 1e-12);

    let overridden = rows(&stdout(&winners(&["model", "--config", cfg, "--sigma-d", "0"])))[0].clone();
    assert!((num(&overridden, "mean_over_median") - 0.08f64.exp()).abs() < 1e-12);

    std::fs::write(dir.path().join("bad.toml"), "[model]\nmu = 1\n").unwrap();
    let bad = winners(&["model", "--config", dir.path().join("bad.toml").to_str().unwrap()]);
    assert_eq!(bad.status.code(), Some(2));
}
