//! Flags shared by every subcommand and the TOML run file that mirrors them.
//!
//! A run file has the common keys at the top and one table per subcommand:
//!
//! ```toml
//! seed = 42
//! format = "csv"
//!
//! [regime]
//! sigma = 1.02
//! grid = [1, 2, 4, 8]
//! ```
//!
//! Flags win over file values. Relative paths in the file are taken relative
//! to the file itself.

use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use serde::Deserialize;

use crate::Failure;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(clap::Args, Debug, Default)]
pub struct CommonArgs {
    /// TOML run file mirroring the flags; flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Root seed; required by every simulation.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Monte Carlo or bootstrap replications.
    #[arg(long, global = true)]
    pub reps: Option<usize>,
    /// Directory for the reports (default: standard output).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConfigFile {
    pub seed: Option<u64>,
    pub reps: Option<usize>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub analyze: crate::analyze::Args,
    pub regime: crate::regime::Args,
    pub gbm: crate::gbm::Args,
    pub model: crate::model::Args,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, Failure> {
        let text =
            std::fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
        let mut cfg: ConfigFile =
            toml::from_str(&text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        let rebase = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        cfg.out.as_mut().map(rebase);
        cfg.analyze.input.iter_mut().for_each(rebase);
        cfg.gbm.input.iter_mut().for_each(rebase);
        cfg.regime.params.as_mut().map(rebase);
        Ok(cfg)
    }
}

/// Common settings after merging flags over the run file.
#[derive(Debug, Clone)]
pub struct Settings {
    pub seed: Option<u64>,
    pub reps: Option<usize>,
    pub out: Option<PathBuf>,
    pub format: Format,
}

impl Settings {
    pub fn resolve(flags: &CommonArgs, file: &ConfigFile) -> Self {
        Self {
            seed: flags.seed.or(file.seed),
            reps: flags.reps.or(file.reps),
            out: flags.out.clone().or_else(|| file.out.clone()),
            format: flags.format.or(file.format).unwrap_or_default(),
        }
    }

    pub fn require_seed(&self) -> Result<u64, Failure> {
        self.seed
            .ok_or_else(|| Failure::Usage("--seed is required for simulated output".into()))
    }
}

/// `START:END` as ISO dates.
pub fn parse_window(s: &str) -> Result<(NaiveDate, NaiveDate), Failure> {
    let bad = |why: String| Failure::Input(format!("window `{s}`: {why}"));
    let (a, b) = s
        .split_once(':')
        .ok_or_else(|| bad("expected START:END".into()))?;
    let date = |d: &str| NaiveDate::parse_from_str(d.trim(), "%Y-%m-%d").map_err(|e| bad(e.to_string()));
    let (start, end) = (date(a)?, date(b)?);
    if end <= start {
        return Err(bad("end must follow start".into()));
    }
    Ok((start, end))
}

/// Checks every input up front and names each by its file stem.
pub fn named_inputs(paths: &[PathBuf]) -> Result<Vec<(String, PathBuf)>, Failure> {
    if paths.is_empty() {
        return Err(Failure::Usage(
            "at least one --input price file is required".into(),
        ));
    }
    let mut named: Vec<(String, PathBuf)> = Vec::with_capacity(paths.len());
    for p in paths {
        if !p.is_file() {
            return Err(Failure::Input(format!("{}: no such file", p.display())));
        }
        let stem = p
            .file_stem()
            .and_then(|s| s.to_str())
            .ok_or_else(|| Failure::Input(format!("{}: cannot name index", p.display())))?;
        if named.iter().any(|(n, _)| n == stem) {
            return Err(Failure::Input(format!("two inputs named `{stem}`")));
        }
        named.push((stem.to_string(), p.clone()));
    }
    named.sort();
    Ok(named)
}
