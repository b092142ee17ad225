// SPDX-License-Identifier: MIT OR Apache-2.0

//! Per-stream score functions `g` and the summed detection scores built from
//! them.
//!
//! The GLR kinds take the standardized statistic `u = U_{n,k,t}`; the
//! fixed-mean kinds take the log-likelihood `ℓ = ℓ_n(t, k, δ)`.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScoreKind {
    /// `log(1 - p0 + p0 exp((u⁺)²/2))`
    Mixture,
    /// `[(u⁺)²/2 + log p0]⁺`
    Hard,
    /// `(u⁺)²/2`, summed over streams
    Square,
    /// `(u⁺)²/2`, maximised over streams
    Max,
    /// `log(1 - p0 + p0 exp(ℓ⁺))`
    FixedMixture,
    /// `[ℓ + log p0]⁺`
    FixedHard,
}

/// Score function `g(·; p0)` with its parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GSpec {
    pub kind: ScoreKind,
    pub p0: f64,
    /// Nominal post-change mean, fixed-mean kinds only.
    pub delta: Option<f64>,
}

/// `log(1 - p + p e^x)` evaluated without overflow for large `x`.
#[inline]
pub fn log_mix(x: f64, p0: f64) -> f64 {
    if x > 0.0 {
        x + (p0 + (1.0 - p0) * (-x).exp()).ln()
    } else {
        (p0 * x.exp_m1()).ln_1p()
    }
}

/// d/dx of [`log_mix`].
#[inline]
pub fn log_mix_derivative(x: f64, p0: f64) -> f64 {
    if x > 0.0 {
        p0 / (p0 + (1.0 - p0) * (-x).exp())
    } else {
        let e = x.exp();
        p0 * e / (1.0 - p0 + p0 * e)
    }
}

pub(crate) fn check_p0(p0: f64) -> Result<()> {
    if p0 > 0.0 && p0 <= 1.0 {
        Ok(())
    } else {
        Err(Error::param("p0", format!("must lie in (0, 1], got {p0}")))
    }
}

pub(crate) fn check_delta(delta: f64) -> Result<()> {
    if delta > 0.0 && delta.is_finite() {
        Ok(())
    } else {
        Err(Error::param("delta", format!("must be positive, got {delta}")))
    }
}

impl GSpec {
    pub fn mixture(p0: f64) -> Result<Self> {
        check_p0(p0)?;
        Ok(Self {
            kind: ScoreKind::Mixture,
            p0,
            delta: None,
        })
    }

    pub fn hard(p0: f64) -> Result<Self> {
        check_p0(p0)?;
        Ok(Self {
            kind: ScoreKind::Hard,
            p0,
            delta: None,
        })
    }

    pub fn square() -> Self {
        Self {
            kind: ScoreKind::Square,
            p0: 1.0,
            delta: None,
        }
    }

    pub fn max() -> Self {
        Self {
            kind: ScoreKind::Max,
            p0: 1.0,
            delta: None,
        }
    }

    pub fn fixed_mixture(p0: f64, delta: f64) -> Result<Self> {
        check_p0(p0)?;
        check_delta(delta)?;
        Ok(Self {
            kind: ScoreKind::FixedMixture,
            p0,
            delta: Some(delta),
        })
    }

    pub fn fixed_hard(p0: f64, delta: f64) -> Result<Self> {
        check_p0(p0)?;
        check_delta(delta)?;
        Ok(Self {
            kind: ScoreKind::FixedHard,
            p0,
            delta: Some(delta),
        })
    }

    pub fn validate(&self) -> Result<()> {
        check_p0(self.p0)?;
        match (self.is_fixed_mean(), self.delta) {
            (true, Some(d)) => check_delta(d),
            (true, None) => Err(Error::param("delta", "required for fixed-mean scores")),
            (false, _) => Ok(()),
        }
    }

    pub fn is_fixed_mean(&self) -> bool {
        matches!(self.kind, ScoreKind::FixedMixture | ScoreKind::FixedHard)
    }

    /// Kinds whose value grows like `u²/2`; their tilting parameter lives in (0, 1).
    pub fn is_square_growth(&self) -> bool {
        !self.is_fixed_mean()
    }

    /// Nominal mean for fixed-mean kinds (1 otherwise).
    pub fn delta_or_one(&self) -> f64 {
        self.delta.unwrap_or(1.0)
    }

    /// `g(x)`.
    #[inline]
    pub fn value(&self, x: f64) -> f64 {
        match self.kind {
            ScoreKind::Mixture => {
                let u = x.max(0.0);
                log_mix(0.5 * u * u, self.p0)
            }
            ScoreKind::Hard => {
                let u = x.max(0.0);
                (0.5 * u * u + self.p0.ln()).max(0.0)
            }
            ScoreKind::Square | ScoreKind::Max => {
                let u = x.max(0.0);
                0.5 * u * u
            }
            ScoreKind::FixedMixture => log_mix(x.max(0.0), self.p0),
            ScoreKind::FixedHard => (x + self.p0.ln()).max(0.0),
        }
    }

    /// `ġ(x)`; the kink at the edge of the flat region takes the left value 0.
    #[inline]
    pub fn derivative(&self, x: f64) -> f64 {
        match self.kind {
            ScoreKind::Mixture => {
                if x <= 0.0 {
                    0.0
                } else {
                    x * log_mix_derivative(0.5 * x * x, self.p0)
                }
            }
            ScoreKind::Hard => {
                if x > self.flat_below() {
                    x
                } else {
                    0.0
                }
            }
            ScoreKind::Square | ScoreKind::Max => x.max(0.0),
            ScoreKind::FixedMixture => {
                if x <= 0.0 {
                    0.0
                } else {
                    log_mix_derivative(x, self.p0)
                }
            }
            ScoreKind::FixedHard => {
                if x > self.flat_below() {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// Argument value at or below which `g` vanishes.
    pub fn flat_below(&self) -> f64 {
        match self.kind {
            ScoreKind::Hard => (-2.0 * self.p0.ln()).sqrt(),
            ScoreKind::FixedHard => -self.p0.ln(),
            _ => 0.0,
        }
    }
}

/// `Σ_n log(1 - p0 + p0 exp[(u_n⁺)²/2])`.
pub fn score_mixture_glr(u: &[f64], p0: f64) -> Result<f64> {
    check_p0(p0)?;
    Ok(u.iter()
        .map(|&x| {
            let v = x.max(0.0);
            log_mix(0.5 * v * v, p0)
        })
        .sum())
}

/// `Σ_n [(u_n⁺)²/2 + log p0]⁺`.
pub fn score_hard_glr(u: &[f64], p0: f64) -> Result<f64> {
    check_p0(p0)?;
    let lp = p0.ln();
    Ok(u.iter()
        .map(|&x| {
            let v = x.max(0.0);
            (0.5 * v * v + lp).max(0.0)
        })
        .sum())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FixedVariant {
    /// Mixture over `ℓ⁺` (rule T1).
    Mixture,
    /// Hard threshold `[ℓ + log p0]⁺` (rule T3).
    Hard,
}

/// Fixed-mean score: `Σ log(1 - p0 + p0 exp[ℓ⁺])` or `Σ [ℓ + log p0]⁺`.
pub fn score_fixed(ell: &[f64], p0: f64, variant: FixedVariant) -> Result<f64> {
    check_p0(p0)?;
    Ok(match variant {
        FixedVariant::Mixture => ell.iter().map(|&l| log_mix(l.max(0.0), p0)).sum(),
        FixedVariant::Hard => {
            let lp = p0.ln();
            ell.iter().map(|&l| (l + lp).max(0.0)).sum()
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn mixture_examples() {
        assert_eq!(score_mixture_glr(&[0.0; 7], 0.3).unwrap(), 0.0);
        assert!((score_mixture_glr(&[2.0], 1.0).unwrap() - 2.0).abs() < 1e-15);
        let direct = (0.9 + 0.1 * 4.5f64.exp()).ln();
        assert!((score_mixture_glr(&[3.0], 0.1).unwrap() - direct).abs() < 1e-14);
        assert!(score_mixture_glr(&[1.0], 0.0).is_err());
        assert!(score_mixture_glr(&[1.0], 1.5).is_err());
    }

    #[test]
    fn mixture_is_finite_for_huge_statistics() {
        // (u⁺)²/2 = 5000 would overflow exp.
        let v = score_mixture_glr(&[100.0], 0.1).unwrap();
        assert!((v - (5000.0 + 0.1f64.ln())).abs() < 1e-9);
    }

    #[test]
    fn hard_examples() {
        assert_eq!(score_hard_glr(&[0.0; 3], 0.2).unwrap(), 0.0);
        let p0 = (-1.0f64).exp();
        assert!((score_hard_glr(&[2.0], p0).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn fixed_examples() {
        assert_eq!(score_fixed(&[0.0; 4], 0.1, FixedVariant::Mixture).unwrap(), 0.0);
        assert_eq!(score_fixed(&[0.0; 4], 0.1, FixedVariant::Hard).unwrap(), 0.0);
        let v = score_fixed(&[5.0], 0.1, FixedVariant::Hard).unwrap();
        assert!((v - (5.0 + 0.1f64.ln())).abs() < 1e-14);
        assert!((v - 2.697).abs() < 1e-3);
        let ell = [1.5, -2.0, 0.25];
        let v = score_fixed(&ell, 1.0, FixedVariant::Mixture).unwrap();
        assert!((v - 1.75).abs() < 1e-15);
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let specs = [
            GSpec::mixture(0.1).unwrap(),
            GSpec::hard(0.1).unwrap(),
            GSpec::square(),
            GSpec::fixed_mixture(0.3, 1.0).unwrap(),
            GSpec::fixed_hard(0.3, 1.0).unwrap(),
        ];
        for g in specs {
            for &x in &[-1.0, 0.3, 1.1, 2.5, 4.0] {
                if (x - g.flat_below()).abs() < 1e-3 {
                    continue;
                }
                let h = 1e-6;
                let fd = (g.value(x + h) - g.value(x - h)) / (2.0 * h);
                assert!((fd - g.derivative(x)).abs() < 1e-6, "{g:?} at {x}");
            }
        }
    }

    #[test]
    fn flat_region() {
        let g = GSpec::hard(0.05).unwrap();
        let edge = g.flat_below();
        assert_eq!(g.value(edge * 0.999), 0.0);
        assert!(g.value(edge * 1.001) > 0.0);
        let g = GSpec::fixed_hard(0.05, 1.0).unwrap();
        assert_eq!(g.value(g.flat_below() - 1e-9), 0.0);
    }

    proptest! {
        #[test]
        fn mixture_with_p0_one_is_square(u in prop::collection::vec(-6.0f64..6.0, 1..20)) {
            let m = score_mixture_glr(&u, 1.0).unwrap();
            let s: f64 = u.iter().map(|x| 0.5 * x.max(0.0).powi(2)).sum();
            prop_assert!((m - s).abs() <= 1e-12 * (1.0 + s));
        }

        #[test]
        fn soft_hard_ordering(u in prop::collection::vec(-5.0f64..8.0, 1..30), p0 in 0.001f64..0.999) {
            let hard = score_hard_glr(&u, p0).unwrap();
            let mix = score_mixture_glr(&u, p0).unwrap();
            prop_assert!(hard >= 0.0);
            prop_assert!(hard <= mix + u.len() as f64 * (1.0 / p0).ln() + 1e-12);
            // Each mixture term also dominates its hard counterpart.
            prop_assert!(hard <= mix + 1e-12);
        }

        #[test]
        fn hard_zero_below_threshold(u in -3.0f64..3.0, p0 in 0.001f64..0.999) {
            let v = score_hard_glr(&[u], p0).unwrap();
            if 0.5 * u.max(0.0).powi(2) <= -p0.ln() {
                prop_assert_eq!(v, 0.0);
            }
        }

        #[test]
        fn log_mix_is_stable(x in -50.0f64..800.0, p0 in 0.0001f64..1.0) {
            let v = log_mix(x, p0);
            prop_assert!(v.is_finite());
            if x < 30.0 {
                let direct = (1.0 - p0 + p0 * x.exp()).ln();
                prop_assert!((v - direct).abs() <= 1e-12 * (1.0 + direct.abs()));
            }
        }
    }
}
