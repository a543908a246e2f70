//! Portfolio analytics for investors with separate risk aversions toward
//! market, green, and brown sources of risk.
//!
//! The market is a one-factor model with a market index, a green stock, and a
//! brown stock, each stock loading on the index plus its own independent
//! idiosyncratic risk. Wealth decomposes multiplicatively into three synthetic
//! indexes, one per risk source, and the investor maximizes a multivariate
//! CRRA utility with one curvature exponent per index. Everything downstream
//! of that setup is closed form: optimal weights, value functions, the
//! green-brown risk-aversion trade-off, and wealth-equivalent losses of
//! suboptimal strategies.
//!
//! Modules:
//! - [`market`]: model parameters, synthetic-asset decomposition, exact-path
//!   simulation of the wealth indexes.
//! - [`preferences`]: multivariate utility, risk-aversion diagnostics, the
//!   ESG-score parameterization of risk aversions, substitution rates.
//! - [`allocation`]: closed-form optimal weights, value functions, the Merton
//!   benchmark, and the green-brown trade-off solver.
//! - [`wel`]: suboptimal-strategy value coefficients and Green-Index wealth
//!   equivalent losses.
//! - [`mc`]: Monte Carlo estimation of expected utility and brute-force grid
//!   search, used to verify every closed form independently.
//! - [`estimation`]: parameter calibration from price/rate CSV data and ESG
//!   score assembly from rating files.
//!
//! All numeric kernels are generic over the scalar type through the
//! [`scalar::Scalar`] trait (`f32` or `f64`); the type aliases at the crate
//! root fix `f64`, which is what the CLI and the test suites use.

// Validation reads as `!(v > 0)` rather than `v <= 0` so NaN fails the check
// and lands in the error path.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod allocation;
pub mod error;
pub mod estimation;
pub mod market;
pub mod mc;
pub mod preferences;
pub mod scalar;
pub mod wel;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// `f64` model parameters.
pub type ModelParams = market::ModelParams<f64>;
/// `f64` synthetic-asset coefficients.
pub type SyntheticCoefficients = market::SyntheticCoefficients<f64>;
/// `f64` simulated path bundle.
pub type PathBundle = market::PathBundle<f64>;
/// `f64` risk-aversion profile.
pub type RiskAversionProfile = preferences::RiskAversionProfile<f64>;
/// `f64` ESG score table.
pub type EsgScoreTable = preferences::EsgScoreTable<f64>;
/// `f64` allocation result.
pub type AllocationResult = allocation::AllocationResult<f64>;
/// `f64` WEL report.
pub type WelReport = wel::WelReport<f64>;
