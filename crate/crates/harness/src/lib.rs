//! Monte Carlo sweep driver for the accumulative iterative feedback code.
//!
//! A sweep designs (or loads) the quantized channel model of every grid
//! point, runs seeded trials in parallel and aggregates them into per-point
//! metrics written as CSV and JSON.

pub mod cache;
pub mod config;
pub mod error;
pub mod sweep;

pub use config::SweepConfig;
pub use error::{HarnessError, Result};
pub use sweep::{run_sweep, SweepOutput, TrialSet};
