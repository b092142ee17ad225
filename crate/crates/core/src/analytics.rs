// SPDX-License-Identifier: MIT OR Apache-2.0

//! Closed-form approximations: average run length under no change, tail
//! probability of the stopping time, expected detection delay, and threshold
//! calibration by inverting the ARL approximation.
//!
//! All expectations over the null score are one-dimensional Gaussian
//! integrals. The integrands are evaluated in log space with the largest
//! exponent factored out, so tilting parameters far above 1 (fixed-mean
//! scores over long windows) do not overflow.

use serde::{Deserialize, Serialize};

use crate::numeric::{
    brent, integrate, integrate_split, norm_cdf, norm_cdf_centered, norm_pdf,
    normal_negative_part_mean, QuadTol, SQRT_2PI,
};
use crate::scenario::Scenario;
use crate::score::{GSpec, ScoreKind};
use crate::{Error, Result};

const THETA_MIN: f64 = 1e-8;
const THETA_MAX_SQUARE: f64 = 1.0 - 1e-8;

/// How `ν(x)` is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NuMethod {
    /// Closed-form approximation in terms of `Φ` and `φ`.
    #[default]
    Approx,
    /// The defining series `2x⁻² exp(-2 Σ n⁻¹ Φ(-x√n / 2))`.
    Series,
}

/// Overshoot correction `ν(x)`, closed-form approximation.
pub fn nu(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("nu requires x > 0, got {x}")));
    }
    let h = 0.5 * x;
    Ok((2.0 / x) * norm_cdf_centered(h) / (h * norm_cdf(h) + norm_pdf(h)))
}

/// Overshoot correction `ν(x)` from its series definition.
pub fn nu_series(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("nu requires x > 0, got {x}")));
    }
    if x < 0.01 {
        // The series needs O(x⁻²) terms here; the small-x expansion is exact
        // to the precision that matters.
        return Ok((-0.583 * x).exp());
    }
    let mut s = 0.0;
    for n in 1..=4_000_000u64 {
        let nf = n as f64;
        let term = norm_cdf(-0.5 * x * nf.sqrt()) / nf;
        s += term;
        if term < 1e-17 {
            break;
        }
    }
    Ok(2.0 / (x * x) * (-2.0 * s).exp())
}

pub fn nu_with(x: f64, method: NuMethod) -> Result<f64> {
    match method {
        NuMethod::Approx => nu(x),
        NuMethod::Series => nu_series(x),
    }
}

/// `∫_lo^hi y ν²(y) dy`.
pub fn nu_integral(lo: f64, hi: f64, method: NuMethod) -> Result<f64> {
    if !(lo > 0.0 && hi >= lo) {
        return Err(Error::Domain(format!("bad ν-integral limits [{lo}, {hi}]")));
    }
    let mut bad = None;
    let (v, _) = integrate(
        |y| match nu_with(y, method) {
            Ok(n) => y * n * n,
            Err(e) => {
                bad = Some(e);
                0.0
            }
        },
        lo,
        hi,
        QuadTol::rel(1e-10),
    );
    match bad {
        Some(e) => Err(e),
        None => Ok(v),
    }
}

/// Tilted moments at one `θ`, all scaled by `exp(-log_scale)`.
#[derive(Debug, Clone, Copy)]
struct Tilted {
    log_scale: f64,
    /// Mass of the flat region `{h = 0}`.
    base: f64,
    j0: f64,
    j1: f64,
}

impl Tilted {
    fn m0(&self) -> f64 {
        self.base + self.j0
    }
}

/// Law of the per-stream null score `h(U) = g(a U + c)`, `U ~ N(0, 1)`.
///
/// For the GLR kinds `a = 1, c = 0`. For the fixed-mean kinds over a window
/// of length `w`, `ℓ ~ N(-δ²w/2, δ²w)` gives `a = δ√w, c = -δ²w/2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NullScoreModel {
    pub g: GSpec,
    scale: f64,
    shift: f64,
}

impl NullScoreModel {
    /// Model for a GLR-type score (mixture, hard, square, max).
    pub fn new(g: GSpec) -> Result<Self> {
        g.validate()?;
        if g.is_fixed_mean() {
            return Err(Error::param(
                "g",
                "fixed-mean scores depend on the window; use NullScoreModel::for_window",
            ));
        }
        Ok(Self {
            g,
            scale: 1.0,
            shift: 0.0,
        })
    }

    /// Model for a fixed-mean score over a window of length `w`.
    pub fn for_window(g: GSpec, w: f64) -> Result<Self> {
        g.validate()?;
        if !g.is_fixed_mean() {
            return Self::new(g);
        }
        if !(w > 0.0 && w.is_finite()) {
            return Err(Error::param("w", format!("window length must be positive, got {w}")));
        }
        let d = g.delta_or_one();
        Ok(Self {
            g,
            scale: d * w.sqrt(),
            shift: -0.5 * d * d * w,
        })
    }

    #[inline]
    fn h(&self, u: f64) -> f64 {
        self.g.value(self.scale * u + self.shift)
    }

    #[inline]
    fn h_dot(&self, u: f64) -> f64 {
        self.scale * self.g.derivative(self.scale * u + self.shift)
    }

    /// `h` vanishes on `u <= u0`.
    fn u0(&self) -> f64 {
        (self.g.flat_below() - self.shift) / self.scale
    }

    fn check_theta(&self, theta: f64) -> Result<()> {
        if self.g.is_square_growth() {
            if !(0.0..1.0).contains(&theta) {
                return Err(Error::Domain(format!(
                    "theta must lie in (0, 1) for square-growth scores, got {theta}"
                )));
            }
        } else if !(theta >= 0.0 && theta.is_finite()) {
            return Err(Error::Domain(format!("theta must be positive, got {theta}")));
        }
        Ok(())
    }

    /// Integration range above `u0`, the log of the integrand's bound, and
    /// the integrand's peak (a break point for the quadrature).
    fn range(&self, theta: f64) -> (f64, f64, f64, f64) {
        let u0 = self.u0();
        if self.g.is_square_growth() {
            // h(u) <= u²/2, so the integrand is bounded by exp(-(1-θ)u²/2).
            let s = 1.0 - theta;
            let hi = u0 + (2.0 * (80.0 + 4.0 * (1.0 + 1.0 / s).ln()) / s).sqrt();
            (u0, hi, 0.0, u0)
        } else {
            // h(u) <= a u + c' with c' the intercept including log p0.
            let a = self.scale;
            let c = self.shift
                + if self.g.kind == ScoreKind::FixedHard {
                    self.g.p0.ln()
                } else {
                    0.0
                };
            let peak = (theta * a).max(u0);
            let log_scale = (theta * (a * peak + c) - 0.5 * peak * peak).max(0.0);
            (u0, peak + 40.0, log_scale, peak)
        }
    }

    fn integrate_tilted<F: Fn(f64) -> f64>(&self, theta: f64, weight: F) -> (f64, f64) {
        let (lo, hi, ls, peak) = self.range(theta);
        let (v, _) = integrate_split(
            |u| {
                let h = self.h(u);
                weight(u) * (theta * h - 0.5 * u * u - ls).exp() / SQRT_2PI
            },
            lo,
            hi,
            &[peak],
            QuadTol::default(),
        );
        (v, ls)
    }

    fn tilted(&self, theta: f64) -> Result<Tilted> {
        self.check_theta(theta)?;
        let (j0, ls) = self.integrate_tilted(theta, |_| 1.0);
        let (j1, _) = self.integrate_tilted(theta, |u| self.h(u));
        Ok(Tilted {
            log_scale: ls,
            base: norm_cdf(self.u0()) * (-ls).exp(),
            j0,
            j1,
        })
    }

    /// `ψ(θ) = log E exp(θ h(U))`.
    pub fn psi(&self, theta: f64) -> Result<f64> {
        let t = self.tilted(theta)?;
        Ok(t.log_scale + t.m0().ln())
    }

    /// `ψ̇(θ)`, the mean of `h` under the tilted law.
    pub fn psi_dot(&self, theta: f64) -> Result<f64> {
        let t = self.tilted(theta)?;
        Ok(t.j1 / t.m0())
    }

    /// `ψ̈(θ)`, the variance of `h` under the tilted law (centred second pass).
    pub fn psi_ddot(&self, theta: f64) -> Result<f64> {
        let t = self.tilted(theta)?;
        let mean = t.j1 / t.m0();
        let (c2, _) = self.integrate_tilted(theta, |u| {
            let d = self.h(u) - mean;
            d * d
        });
        Ok((c2 + t.base * mean * mean) / t.m0())
    }

    /// `γ(θ) = ½θ² E[ḣ(U)² exp(θh(U) - ψ(θ))]`.
    pub fn gamma(&self, theta: f64) -> Result<f64> {
        let t = self.tilted(theta)?;
        let (v, _) = self.integrate_tilted(theta, |u| {
            let d = self.h_dot(u);
            d * d
        });
        Ok(0.5 * theta * theta * v / t.m0())
    }

    /// `E h(U)`.
    pub fn mean(&self) -> f64 {
        let (v, _) = self.integrate_tilted(0.0, |u| self.h(u));
        v
    }

    /// Solve `ψ̇(θ) = b / N`.
    pub fn solve_theta(&self, b: f64, n: usize) -> Result<f64> {
        if n == 0 {
            return Err(Error::param("N", "must be positive"));
        }
        let target = b / n as f64;
        let mean = self.mean();
        if !(target > mean) {
            return Err(Error::Calibration(format!(
                "threshold below null mean: b/N = {target} <= E g(U) = {mean}"
            )));
        }
        let f = |th: f64| self.psi_dot(th).map(|v| v - target).unwrap_or(f64::NAN);
        let lo = THETA_MIN;
        if f(lo) > 0.0 {
            return Err(Error::Convergence(format!(
                "theta below {lo} for b/N = {target}"
            )));
        }
        let hi = if self.g.is_square_growth() {
            // Approach 1 gradually: integrals near θ = 1 are long and costly.
            let mut hi = None;
            let mut gap = 0.5;
            while gap >= 1.0 - THETA_MAX_SQUARE {
                if f(1.0 - gap) >= 0.0 {
                    hi = Some(1.0 - gap);
                    break;
                }
                gap *= 0.1;
            }
            hi.ok_or_else(|| {
                Error::Convergence(format!(
                    "theta pushed against the upper end of (0, 1) for b/N = {target}"
                ))
            })?
        } else {
            let mut hi = 1.0;
            while f(hi) < 0.0 {
                hi *= 2.0;
                if hi > 1e6 {
                    return Err(Error::Convergence(format!("no theta below 1e6 for b/N = {target}")));
                }
            }
            hi
        };
        brent(f, lo, hi, 1e-15, 1e-11)
    }
}

/// Ingredients and value of the boundary-crossing ARL approximation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArlDetails {
    pub theta: f64,
    pub psi: f64,
    pub psi_dot: f64,
    pub psi_ddot: f64,
    pub gamma: f64,
    /// `log H(N, θ)`.
    pub log_h: f64,
    /// `∫ y ν²(y) dy` over the window limits.
    pub nu_integral: f64,
    pub arl: f64,
}

fn check_window(m0: usize, m1: usize) -> Result<()> {
    if m0 == 0 || m0 >= m1 {
        return Err(Error::param("m1", format!("need 1 <= m0 < m1, got ({m0}, {m1})")));
    }
    Ok(())
}

/// `log H(N, θ)` and the solved quantities for one null model.
fn large_deviation(model: &NullScoreModel, n: usize, b: f64) -> Result<(f64, f64, f64, f64, f64, f64)> {
    let theta = model.solve_theta(b, n)?;
    let psi = model.psi(theta)?;
    let psi_dot = model.psi_dot(theta)?;
    let psi_ddot = model.psi_ddot(theta)?;
    let gamma = model.gamma(theta)?;
    if !(gamma > 0.0 && psi_ddot > 0.0) {
        return Err(Error::Convergence(format!(
            "degenerate tilted law at theta = {theta}: gamma = {gamma}, psi'' = {psi_ddot}"
        )));
    }
    let nf = n as f64;
    let log_h = theta.ln() + 0.5 * (2.0 * std::f64::consts::PI * psi_ddot).ln()
        - gamma.ln()
        - 0.5 * nf.ln()
        + nf * (theta * psi_dot - psi);
    Ok((theta, psi, psi_dot, psi_ddot, gamma, log_h))
}

/// ARL approximation for a window-limited rule summing `g(U)` over `N`
/// streams, with every intermediate quantity.
pub fn arl_glr_details(
    g: &GSpec,
    n: usize,
    b: f64,
    m0: usize,
    m1: usize,
    method: NuMethod,
) -> Result<ArlDetails> {
    check_window(m0, m1)?;
    let model = NullScoreModel::new(*g)?;
    let (theta, psi, psi_dot, psi_ddot, gamma, log_h) = large_deviation(&model, n, b)?;
    let c = 2.0 * n as f64 * gamma;
    let integral = nu_integral((c / m1 as f64).sqrt(), (c / m0 as f64).sqrt(), method)?;
    Ok(ArlDetails {
        theta,
        psi,
        psi_dot,
        psi_ddot,
        gamma,
        log_h,
        nu_integral: integral,
        arl: (log_h - integral.ln()).exp(),
    })
}

/// ARL approximation for `T2`/`T4`-type rules (mixture, hard or square score).
pub fn arl_glr(g: &GSpec, n: usize, b: f64, m0: usize, m1: usize) -> Result<f64> {
    arl_glr_details(g, n, b, m0, m1, NuMethod::Approx).map(|d| d.arl)
}

/// ARL approximation for fixed-mean rules: the large-deviation rate is
/// computed separately for every window length and the crossing rates are
/// summed over windows.
pub fn arl_fixed_mean(g: &GSpec, n: usize, b: f64, m0: usize, m1: usize) -> Result<f64> {
    check_window(m0, m1)?;
    if !g.is_fixed_mean() {
        return Err(Error::param("g", "arl_fixed_mean needs a fixed-mean score"));
    }
    let nf = n as f64;
    let mut rate = 0.0;
    for w in m0..=m1 {
        let wf = w as f64;
        let model = NullScoreModel::for_window(*g, wf)?;
        match large_deviation(&model, n, b) {
            Ok((_, _, _, _, gamma, log_h)) => {
                let x = (2.0 * nf * gamma / wf).sqrt();
                let v = nu(x)?;
                rate += nf * gamma / (wf * wf) * v * v * (-log_h).exp();
            }
            // Tilting beyond the search range: the window's crossing rate is
            // far below anything representable.
            Err(Error::Convergence(_)) => continue,
            Err(e) => return Err(e),
        }
    }
    if !(rate > 0.0) {
        return Err(Error::Convergence("every window rate vanished".into()));
    }
    Ok(1.0 / rate)
}

/// ARL of the largest single-stream log-GLR: one stream's approximation
/// divided by the number of streams.
pub fn arl_max(n: usize, b: f64, m0: usize, m1: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::param("N", "must be positive"));
    }
    Ok(arl_glr(&GSpec::square(), 1, b, m0, m1)? / n as f64)
}

/// ARL approximation dispatched on the score kind.
pub fn arl(g: &GSpec, n: usize, b: f64, m0: usize, m1: usize) -> Result<f64> {
    match g.kind {
        ScoreKind::Max => arl_max(n, b, m0, m1),
        ScoreKind::FixedMixture | ScoreKind::FixedHard => arl_fixed_mean(g, n, b, m0, m1),
        _ => arl_glr(g, n, b, m0, m1),
    }
}

/// `P{T <= m}` under no change, from the exponential law with rate `1/ARL`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailProb {
    /// `min(1, m / ARL)`.
    pub linear: f64,
    /// `1 - exp(-m / ARL)`.
    pub exponential: f64,
}

pub fn tail_from_arl(arl: f64, m: f64) -> TailProb {
    let x = m / arl;
    TailProb {
        linear: x.min(1.0),
        exponential: -(-x).exp_m1(),
    }
}

pub fn tail_prob(g: &GSpec, n: usize, b: f64, m0: usize, m1: usize, m: f64) -> Result<TailProb> {
    if !(m >= 0.0) {
        return Err(Error::param("m", format!("horizon must be nonnegative, got {m}")));
    }
    Ok(tail_from_arl(arl(g, n, b, m0, m1)?, m))
}

/// Threshold whose approximate ARL equals `target_arl`.
pub fn calibrate_threshold(g: &GSpec, n: usize, target_arl: f64, m0: usize, m1: usize) -> Result<f64> {
    check_window(m0, m1)?;
    if !(target_arl > m0 as f64) || !target_arl.is_finite() {
        return Err(Error::param(
            "target_arl",
            format!("must exceed m0 = {m0}, got {target_arl}"),
        ));
    }
    let log_target = target_arl.ln();
    let f = |b: f64| -> Result<f64> {
        match arl(g, n, b, m0, m1) {
            Ok(a) => Ok(a.ln() - log_target),
            // Below the null mean the approximation is not defined; treat it
            // as far below any target.
            Err(Error::Calibration(_)) => Ok(-1e3),
            Err(e) => Err(e),
        }
    };
    // Lowest threshold with a defined tilting parameter.
    let b_min = match g.kind {
        ScoreKind::Max => NullScoreModel::new(GSpec::square())?.mean(),
        ScoreKind::FixedMixture | ScoreKind::FixedHard => {
            let a = NullScoreModel::for_window(*g, m0 as f64)?.mean();
            let z = NullScoreModel::for_window(*g, m1 as f64)?.mean();
            n as f64 * a.max(z)
        }
        _ => n as f64 * NullScoreModel::new(*g)?.mean(),
    };
    // Walk up until the approximation is increasing and above the target; the
    // region next to b_min, where θ → 0, is not on the monotone branch.
    let unit = b_min.max(1.0);
    let mut prev: Option<(f64, f64)> = None;
    for k in 1..200 {
        let b = b_min + 0.05 * unit * (1.3f64.powi(k) - 1.0);
        let fb = match f(b) {
            Ok(v) => v,
            // θ too close to 0 for the root search: not yet on the branch.
            Err(Error::Convergence(_)) => {
                prev = None;
                continue;
            }
            Err(e) => return Err(e),
        };
        if let Some((pb, pf)) = prev {
            if fb >= 0.0 && fb > pf {
                if pf < 0.0 {
                    return brent(|x| f(x).unwrap_or(f64::NAN), pb, b, 1e-13, 1e-12);
                }
                return Err(Error::Calibration(format!(
                    "target ARL {target_arl} is below the smallest ARL on the monotone branch"
                )));
            }
        }
        prev = Some((b, fb));
    }
    Err(Error::Calibration(format!("target ARL {target_arl} not reached")))
}

/// `ρ(Δ) = Δ²/4 + 1 - Σ_i i⁻¹ E S̃ᵢ⁻` for the walk with increments
/// `N(Δ²/2, Δ²)`.
pub fn rho(delta: f64) -> Result<f64> {
    Ok(0.25 * delta * delta + 1.0 - negative_part_series(delta)?)
}

/// `E min_{t>=0} S̃ₜ = -Σ_i i⁻¹ E S̃ᵢ⁻`.
pub fn walk_min_mean(delta: f64) -> Result<f64> {
    Ok(-negative_part_series(delta)?)
}

fn negative_part_series(delta: f64) -> Result<f64> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::Domain(format!("signal norm must be positive, got {delta}")));
    }
    let mut s = 0.0;
    for i in 1..=100_000u64 {
        let fi = i as f64;
        let term = normal_negative_part_mean(0.5 * fi * delta * delta, fi.sqrt() * delta) / fi;
        s += term;
        if term <= 1e-12 * s.abs() || term == 0.0 {
            break;
        }
    }
    Ok(s)
}

/// `E g(U)` for a GLR-type score under no change.
pub fn expected_g_null(g: &GSpec) -> Result<f64> {
    Ok(NullScoreModel::new(*g)?.mean())
}

/// An approximation together with the caveats met while computing it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Approximation {
    pub value: f64,
    pub warnings: Vec<String>,
}

/// EDD approximation for `T2`/`T4` with change at time 0.
///
/// `m1`, when given, is only used to flag windows too short for the
/// approximation (`m1` should well exceed `2b/Δ²`).
pub fn edd_glr(g: &GSpec, b: f64, scenario: &Scenario, m1: Option<usize>) -> Result<Approximation> {
    scenario.validate()?;
    if !matches!(g.kind, ScoreKind::Mixture | ScoreKind::Hard | ScoreKind::Square) {
        return Err(Error::param("g", "the EDD approximation covers mixture and hard scores"));
    }
    if scenario.is_null() {
        return Err(Error::param("scenario", "no affected streams"));
    }
    let k = scenario.affected.len() as f64;
    let n = scenario.n_streams as f64;
    let delta = scenario.signal_norm();
    let d2 = delta * delta;
    let r = rho(delta)?;
    let eg = expected_g_null(g)?;
    let bracket = b + r - k * g.p0.ln() - 0.5 * k + (r - 1.0 - 0.25 * d2) - (n - k) * eg;
    let mut warnings = Vec::new();
    if let Some(m1) = m1 {
        if (m1 as f64) < 4.0 * b / d2 {
            warnings.push(format!(
                "window m1 = {m1} is not large compared with 2b/Δ² = {:.2}",
                2.0 * b / d2
            ));
        }
    }
    if bracket <= 0.0 {
        warnings.push("bracketed term is not positive".into());
    }
    Ok(Approximation {
        value: 2.0 * bracket / d2,
        warnings,
    })
}

/// `E g(U + m)` for a GLR-type score.
fn expected_g_shifted(g: &GSpec, m: f64) -> f64 {
    let u0 = g.flat_below();
    let lo = u0.max(m - 12.0);
    let hi = lo.max(m) + 12.0;
    integrate_split(|u| norm_pdf(u - m) * g.value(u), lo, hi, &[m], QuadTol::default()).0
}

/// First-order EDD: the time at which the expected statistic reaches `b`.
///
/// For GLR-type scores this solves `E Z_{0,t} = b` with the affected streams
/// at their post-change law; for fixed-mean scores it uses the drift
/// `δ(Σμ - |𝒩|δ/2)` with the correction from the unaffected streams'
/// expected score at the first-order time.
pub fn edd_crude(g: &GSpec, b: f64, scenario: &Scenario, m0: usize, m1: usize) -> Result<Approximation> {
    scenario.validate()?;
    check_window(m0, m1)?;
    if scenario.is_null() {
        return Err(Error::param("scenario", "no affected streams"));
    }
    let k = scenario.affected.len() as f64;
    let n = scenario.n_streams as f64;
    let mut warnings = Vec::new();
    let value = match g.kind {
        ScoreKind::Mixture | ScoreKind::Hard | ScoreKind::Square => {
            let eg0 = expected_g_null(g)?;
            let f = |t: f64| {
                scenario
                    .means
                    .iter()
                    .map(|mu| expected_g_shifted(g, mu * t.sqrt()))
                    .sum::<f64>()
                    + (n - k) * eg0
                    - b
            };
            if f(m0 as f64) >= 0.0 {
                m0 as f64
            } else if f(m1 as f64) < 0.0 {
                warnings.push(format!("expected statistic stays below b within m1 = {m1}"));
                m1 as f64
            } else {
                brent(f, m0 as f64, m1 as f64, 1e-10, 1e-10)?
            }
        }
        ScoreKind::FixedMixture | ScoreKind::FixedHard => {
            let d = g.delta_or_one();
            let drift = d * (scenario.means.iter().sum::<f64>() - 0.5 * k * d);
            if !(drift > 0.0) {
                return Err(Error::Domain(format!(
                    "nonpositive log-likelihood drift {drift}; the rule has no finite delay"
                )));
            }
            let t0 = (b / drift).max(1e-9);
            let eg = NullScoreModel::for_window(*g, t0)?.mean();
            let t = (b - k * g.p0.ln() - (n - k) * eg) / drift;
            if t > m1 as f64 {
                warnings.push(format!("first-order delay {t:.2} exceeds m1 = {m1}"));
            }
            t.max(m0 as f64)
        }
        ScoreKind::Max => {
            return Err(Error::param("g", "no first-order EDD for the max rule"));
        }
    };
    Ok(Approximation { value, warnings })
}
