// SPDX-License-Identifier: MIT OR Apache-2.0

//! Change-point scenarios: which streams shift, by how much, and when.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Independent unit-variance Gaussian streams; after `change_point` the
/// streams in `affected` (0-based) have means `means`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub n_streams: usize,
    pub change_point: Option<u64>,
    pub affected: Vec<usize>,
    pub means: Vec<f64>,
}

impl Scenario {
    /// No change at all.
    pub fn null(n_streams: usize) -> Self {
        Self {
            n_streams,
            change_point: None,
            affected: Vec::new(),
            means: Vec::new(),
        }
    }

    /// Immediate change (`κ = 0`) in the first `count` streams, all with mean `mu`.
    pub fn immediate(n_streams: usize, count: usize, mu: f64) -> Result<Self> {
        Self::new(n_streams, Some(0), (0..count).collect(), vec![mu; count])
    }

    /// Immediate change with the affected count rounded from the fraction `p`.
    pub fn immediate_fraction(n_streams: usize, p: f64, mu: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::param("p", format!("fraction must lie in [0, 1], got {p}")));
        }
        let count = (p * n_streams as f64).round() as usize;
        Self::immediate(n_streams, count, mu)
    }

    pub fn new(
        n_streams: usize,
        change_point: Option<u64>,
        affected: Vec<usize>,
        means: Vec<f64>,
    ) -> Result<Self> {
        let s = Self {
            n_streams,
            change_point,
            affected,
            means,
        };
        s.validate()?;
        Ok(s)
    }

    /// Scenario from a full mean vector; streams with zero mean are unaffected.
    pub fn from_mean_vector(change_point: Option<u64>, mu: &[f64]) -> Result<Self> {
        let (affected, means) = mu
            .iter()
            .enumerate()
            .filter(|(_, m)| **m != 0.0)
            .map(|(i, m)| (i, *m))
            .unzip();
        Self::new(mu.len(), change_point, affected, means)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_streams == 0 {
            return Err(Error::param("n_streams", "must be positive"));
        }
        if self.affected.len() != self.means.len() {
            return Err(Error::param(
                "means",
                format!(
                    "{} affected streams but {} means",
                    self.affected.len(),
                    self.means.len()
                ),
            ));
        }
        let mut seen = vec![false; self.n_streams];
        for &n in &self.affected {
            if n >= self.n_streams {
                return Err(Error::param(
                    "affected",
                    format!("stream {n} out of range for {} streams", self.n_streams),
                ));
            }
            if std::mem::replace(&mut seen[n], true) {
                return Err(Error::param("affected", format!("stream {n} listed twice")));
            }
        }
        if let Some(m) = self.means.iter().find(|m| !(**m > 0.0 && m.is_finite())) {
            return Err(Error::param("means", format!("must be positive, got {m}")));
        }
        if self.change_point.is_none() && !self.affected.is_empty() {
            return Err(Error::param(
                "change_point",
                "affected streams given without a change-point",
            ));
        }
        Ok(())
    }

    pub fn is_null(&self) -> bool {
        self.change_point.is_none() || self.affected.is_empty()
    }

    /// Fraction of affected streams, `p = |𝒩| / N`.
    pub fn fraction(&self) -> f64 {
        self.affected.len() as f64 / self.n_streams as f64
    }

    /// Euclidean norm of the post-change mean vector.
    pub fn signal_norm(&self) -> f64 {
        self.means.iter().map(|m| m * m).sum::<f64>().sqrt()
    }

    /// Post-change mean of every stream.
    pub fn mean_vector(&self) -> Vec<f64> {
        let mut mu = vec![0.0; self.n_streams];
        for (&n, &m) in self.affected.iter().zip(&self.means) {
            mu[n] = m;
        }
        mu
    }

    /// Draw the observation vector for time `t` (1-based) into `out`.
    pub fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, t: u64, mean: &[f64], out: &mut [f64]) {
        for o in out.iter_mut() {
            *o = rng.sample(StandardNormal);
        }
        if matches!(self.change_point, Some(kappa) if t > kappa) {
            for (o, m) in out.iter_mut().zip(mean) {
                *o += m;
            }
        }
    }
}
