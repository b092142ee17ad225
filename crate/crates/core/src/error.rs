// SPDX-License-Identifier: MIT OR Apache-2.0

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected} values, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("time index k={k} is outside the window [{lo}, {hi}] at t={t}")]
    OutOfWindow { k: u64, lo: u64, hi: u64, t: u64 },

    #[error("invalid parameter {name}: {reason}")]
    Parameter { name: &'static str, reason: String },

    #[error("{0}")]
    Domain(String),

    #[error("calibration failed: {0}")]
    Calibration(String),

    #[error("no convergence: {0}")]
    Convergence(String),

    #[error("simulation: {0}")]
    Simulation(String),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::Parameter {
            name,
            reason: reason.into(),
        }
    }
}
