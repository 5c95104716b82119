//! Statistics of extreme-return stocks and their effect on passive versus
//! concentrated portfolios.
//!
//! The crate covers closed-form log-normal statistics and fitters
//! ([`distributions`]), the typical finite-sample mean of log-normal returns
//! ([`lognormal_sum`]), geometric Brownian motion simulation and estimation
//! ([`gbm`]), a distributed-drift index model ([`index_model`]) and an
//! empirical pipeline over price files ([`empirical`]).
//!
//! Everything random takes an explicit seed; identical seeds give identical
//! results regardless of the number of threads.

pub mod distributions;
pub mod empirical;
pub mod error;
pub mod gbm;
pub mod index_model;
pub mod kde;
pub mod lognormal_sum;
pub mod optim;
pub mod quad;
pub mod rng;
pub mod special;
pub mod stats;

pub use distributions::{
    AsymmetricLaplaceParams, GammaParams, Law, LogNormalParams, MomentSummary, NormalParams, SkewNormalParams,
};
pub use empirical::{IndexSummary, PricePanel, ReturnSample};
pub use error::{Error, Result};
pub use gbm::{DriftVolPanel, GBMEstimate, GBMParams, PricePath};
pub use index_model::{DriftModelParams, ImpliedLogNormal, UnderperformanceRatios};
pub use kde::KDEModeResult;
pub use lognormal_sum::{RegimeCurve, RegimeLabel};

/// Library version, embedded in report headers.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
