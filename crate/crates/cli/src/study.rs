//! Result cells and the analytic counterparts of simulated quantities.

use mixdetect::analytics::{arl, edd_crude, edd_glr, Approximation};
use mixdetect::detector::Rule;
use mixdetect::montecarlo::Estimate;
use mixdetect::scenario::Scenario;
use serde::Serialize;

/// One computed value, optionally checked against a reference.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Cell {
    pub label: String,
    pub value: f64,
    pub std_error: Option<f64>,
    pub reference: Option<f64>,
    /// Absolute tolerance around the reference.
    pub tolerance: Option<f64>,
    pub pass: Option<bool>,
}

impl Cell {
    pub fn info(label: impl Into<String>, value: f64) -> Self {
        Self {
            label: label.into(),
            value,
            std_error: None,
            reference: None,
            tolerance: None,
            pass: None,
        }
    }

    /// Deterministic value checked to an absolute tolerance.
    pub fn exact(label: impl Into<String>, value: f64, reference: f64, tolerance: f64) -> Self {
        Self {
            label: label.into(),
            value,
            std_error: None,
            reference: Some(reference),
            tolerance: Some(tolerance),
            pass: Some((value - reference).abs() <= tolerance),
        }
    }

    /// Simulated value checked against a reference simulation of
    /// `reference_trials` trials, within `factor` combined standard errors.
    pub fn simulated(label: impl Into<String>, est: &Estimate, reference: f64, reference_trials: usize, factor: f64) -> Self {
        let se_ref = est.std_error * (est.n_trials as f64 / reference_trials as f64).sqrt();
        let combined = est.std_error.hypot(se_ref);
        let tolerance = factor * combined;
        Self {
            label: label.into(),
            value: est.value,
            std_error: Some(est.std_error),
            reference: Some(reference),
            tolerance: Some(tolerance),
            pass: Some((est.value - reference).abs() <= tolerance),
        }
    }

    /// Simulated value with no reference.
    pub fn estimate(label: impl Into<String>, est: &Estimate) -> Self {
        Self {
            std_error: Some(est.std_error),
            ..Self::info(label, est.value)
        }
    }

    pub fn with_pass(mut self, pass: bool) -> Self {
        self.pass = Some(pass);
        self
    }
}

/// Analytic ARL of a rule, where one exists.
pub fn theory_arl(rule: &Rule, n: usize, b: f64, m0: usize, m1: usize) -> Option<mixdetect::Result<f64>> {
    match rule {
        Rule::Mei { .. } | Rule::Tv { .. } | Rule::Profile(_) => None,
        _ => rule.gspec().map(|g| arl(&g, n, b, m0, m1)),
    }
}

/// Analytic detection delay of a rule, where one exists.
pub fn theory_edd(rule: &Rule, b: f64, scenario: &Scenario, m0: usize, m1: usize) -> Option<mixdetect::Result<Approximation>> {
    let g = rule.gspec()?;
    match rule {
        Rule::T2 { .. } | Rule::T4 { .. } => Some(edd_glr(&g, b, scenario, Some(m1))),
        Rule::T1 { .. } | Rule::T3 { .. } => Some(edd_crude(&g, b, scenario, m0, m1)),
        _ => None,
    }
}

/// Derive a per-cell seed from a base seed.
pub fn cell_seed(base: u64, index: usize) -> u64 {
    base.wrapping_add((index as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}
