//! Probabilistic forecasts of daily retail unit sales.
//!
//! Each series is modelled by an exponential-smoothing state-space recursion
//! whose observations are negative binomial, scaled by a deterministic
//! amplitude vector built from multiplicative calendar factors. Many-day-ahead
//! distributions come from Monte Carlo trajectories; upper hierarchy levels
//! are either modelled directly or obtained by summing bottom-level
//! trajectories.

pub mod amplitude;
pub mod calendar;
pub mod config;
pub mod data;
pub mod error;
pub mod evaluate;
pub mod hierarchy;
pub mod issm;
pub mod negbin;
pub mod pipeline;
pub mod simulate;

pub use error::{ForecastError, Result};
