//! Two-sample tests for equality of upper semivariance.
//!
//! The departure between two populations is estimated by a two-sample
//! U-statistic ([`ustat`]) and tested either by jackknife empirical
//! likelihood ([`jel`], the default) or by a normal approximation
//! ([`asymptotic_normal`]). [`montecarlo`] measures size and power by
//! simulation and [`cli`] backs the `semivar` binary.

pub mod asymptotic_normal;
pub mod cli;
pub mod error;
pub mod jel;
pub mod montecarlo;
pub mod samples;
pub mod semivariance;
pub mod sum;
pub mod ustat;

pub use error::{Error, Result};
pub use samples::{validate_sample, PooledSample, Sample};
