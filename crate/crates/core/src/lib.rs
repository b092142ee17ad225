// SPDX-License-Identifier: MIT OR Apache-2.0

//! Sequential detection of a change-point that affects an unknown subset of
//! many independent Gaussian data streams.
//!
//! The crate is organised bottom-up:
//!
//! - [`stream`]: windowed prefix sums and the per-stream statistics
//!   `U_{n,k,t}`, the log-GLR and the fixed-mean log-likelihood.
//! - [`score`]: the per-stream score functions `g` (mixture, hard threshold,
//!   square, fixed-mean variants) with values and derivatives.
//! - [`detector`]: online stopping rules (`T1`..`T4`, max, Mei, TV, profile)
//!   and the parallel combination of several rules.
//! - [`analytics`]: ARL, tail probability and EDD approximations, threshold
//!   calibration.
//! - [`montecarlo`]: reproducible simulation of stopping times, ARL/EDD
//!   estimates, empirical calibration and exponentiality diagnostics.
//! - [`profile`]: spatial sensor grids with a Gaussian signal profile and the
//!   matched-filter statistic.
#![forbid(unsafe_code)]

pub mod analytics;
pub mod detector;
mod error;
pub mod montecarlo;
pub mod numeric;
pub mod profile;
pub mod scenario;
pub mod score;
pub mod stream;

pub use error::{Error, Result};
