//! Group-sparse Bayesian channel estimation for multi-user dual-wideband THz
//! hybrid MIMO with low-resolution ADCs.

pub mod channel;
pub mod config;
pub mod dictionary;
pub mod error;
pub mod estimators;
pub mod frontend;
pub mod harness;
pub mod linalg;
pub mod metrics;

pub use config::{AdcBits, AngleMode, NoiseCovarianceMode, PulseShape, ScenarioConfig};
pub use error::{Error, Result};
