//! Forecast dominance diagnostics: Murphy curves over elementary scores,
//! closed-form Gaussian classification, calibration and normality checks,
//! convex-order tests and bootstrap dominance tests.

pub mod bootstrap;
pub mod calibration;
pub mod cli;
pub mod error;
pub mod gaussian;
pub mod murphy;
pub mod order;
pub mod scoring;
pub mod series;
pub mod simulate;

pub use error::{Error, Result};
pub use series::PairedSeries;
