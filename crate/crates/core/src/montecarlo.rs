// SPDX-License-Identifier: MIT OR Apache-2.0

//! Reproducible simulation of stopping times.
//!
//! Trial `i` draws its observations from a ChaCha8 generator seeded with the
//! plan's base seed and switched to stream `i`, so every result is a pure
//! function of `(plan, seed)` whatever the number of worker threads.
//! Gaussian variates come from `rand_distr::StandardNormal`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::detector::{Decision, Detector, DetectorConfig, ParallelDetector, Rule, StepStat};
use crate::numeric::KahanSum;
use crate::scenario::Scenario;
use crate::{Error, Result};

/// Single rule or parallel combination to simulate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DetectorSpec {
    Single(DetectorConfig),
    Parallel {
        components: Vec<(Rule, f64)>,
        m0: usize,
        m1: usize,
    },
}

impl DetectorSpec {
    pub fn n_components(&self) -> usize {
        match self {
            DetectorSpec::Single(_) => 1,
            DetectorSpec::Parallel { components, .. } => components.len(),
        }
    }

    pub fn m0(&self) -> usize {
        match self {
            DetectorSpec::Single(c) => c.m0,
            DetectorSpec::Parallel { m0, .. } => *m0,
        }
    }

    pub fn m1(&self) -> usize {
        match self {
            DetectorSpec::Single(c) => c.m1,
            DetectorSpec::Parallel { m1, .. } => *m1,
        }
    }

    pub fn thresholds(&self) -> Vec<f64> {
        match self {
            DetectorSpec::Single(c) => vec![c.threshold],
            DetectorSpec::Parallel { components, .. } => components.iter().map(|c| c.1).collect(),
        }
    }

    /// Copy with new thresholds, one per component.
    pub fn with_thresholds(&self, b: &[f64]) -> Result<Self> {
        if b.len() != self.n_components() {
            return Err(Error::Dimension {
                expected: self.n_components(),
                got: b.len(),
            });
        }
        Ok(match self {
            DetectorSpec::Single(c) => DetectorSpec::Single(DetectorConfig {
                threshold: b[0],
                ..c.clone()
            }),
            DetectorSpec::Parallel { components, m0, m1 } => DetectorSpec::Parallel {
                components: components
                    .iter()
                    .zip(b)
                    .map(|((r, _), &x)| (r.clone(), x))
                    .collect(),
                m0: *m0,
                m1: *m1,
            },
        })
    }

    fn build(&self, n_streams: usize) -> Result<Runner> {
        Ok(match self {
            DetectorSpec::Single(c) => Runner::Single(Detector::new(c.clone(), n_streams)?),
            DetectorSpec::Parallel { components, m0, m1 } => {
                Runner::Parallel(ParallelDetector::new(components.clone(), n_streams, *m0, *m1)?)
            }
        })
    }
}

enum Runner {
    Single(Detector),
    Parallel(ParallelDetector),
}

impl Runner {
    fn step(&mut self, y: &[f64]) -> Result<Decision> {
        match self {
            Runner::Single(d) => d.step(y),
            Runner::Parallel(d) => d.step(y),
        }
    }

    fn observe(&mut self, y: &[f64], out: &mut Vec<StepStat>) -> Result<()> {
        out.clear();
        match self {
            Runner::Single(d) => out.push(d.observe(y)?),
            Runner::Parallel(d) => out.extend_from_slice(d.observe(y)?),
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    /// Run every trial until it stops (or reaches the cap).
    FullRun,
    /// Run only up to the horizon and extrapolate with the exponential law.
    TailShortcut,
}

/// What to simulate and how often.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialPlan {
    pub detector: DetectorSpec,
    pub scenario: Scenario,
    pub n_trials: usize,
    /// Horizon `m` of the tail shortcut.
    pub horizon: Option<u64>,
    /// Hard cap on the length of a full run.
    pub cap: u64,
    pub seed: u64,
    pub mode: Mode,
}

impl TrialPlan {
    /// Null runs up to `horizon` for the tail-shortcut ARL estimate.
    pub fn arl_shortcut(detector: DetectorSpec, n_streams: usize, horizon: u64, n_trials: usize, seed: u64) -> Self {
        Self {
            detector,
            scenario: Scenario::null(n_streams),
            n_trials,
            horizon: Some(horizon),
            cap: horizon,
            seed,
            mode: Mode::TailShortcut,
        }
    }

    /// Complete runs capped at `cap` steps.
    pub fn full_run(detector: DetectorSpec, scenario: Scenario, n_trials: usize, cap: u64, seed: u64) -> Self {
        Self {
            detector,
            scenario,
            n_trials,
            horizon: None,
            cap,
            seed,
            mode: Mode::FullRun,
        }
    }

    /// Complete runs for a detection-delay estimate, capped at `10 m1`.
    pub fn edd(detector: DetectorSpec, scenario: Scenario, n_trials: usize, seed: u64) -> Self {
        let cap = 10 * detector.m1() as u64;
        Self::full_run(detector, scenario, n_trials, cap, seed)
    }

    pub fn validate(&self) -> Result<()> {
        self.scenario.validate()?;
        if self.n_trials == 0 {
            return Err(Error::param("trials", "must be positive"));
        }
        match self.mode {
            Mode::TailShortcut => match self.horizon {
                Some(m) if m > 0 => {}
                _ => return Err(Error::param("horizon", "the tail shortcut needs a positive horizon")),
            },
            Mode::FullRun => {
                if self.cap == 0 {
                    return Err(Error::param("cap", "full runs need a positive cap"));
                }
            }
        }
        // Building once checks the detector against the stream count.
        self.detector.build(self.scenario.n_streams).map(|_| ())
    }

    fn limit(&self) -> u64 {
        match self.mode {
            Mode::TailShortcut => self.horizon.unwrap_or(self.cap),
            Mode::FullRun => self.cap,
        }
    }
}

/// Stopping time of one trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialOutcome {
    /// Stop time, or the run length if censored.
    pub time: u64,
    pub censored: bool,
    /// Component that fired, for parallel detectors.
    pub component: Option<usize>,
}

fn trial_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Simulate trial `index` of the plan.
pub fn run_trial(plan: &TrialPlan, index: u64) -> Result<TrialOutcome> {
    let mut det = plan.detector.build(plan.scenario.n_streams)?;
    let mut rng = trial_rng(plan.seed, index);
    let mean = plan.scenario.mean_vector();
    let mut y = vec![0.0; plan.scenario.n_streams];
    let limit = plan.limit();
    for t in 1..=limit {
        plan.scenario.sample_into(&mut rng, t, &mean, &mut y);
        let d = det.step(&y)?;
        if d.stopped {
            return Ok(TrialOutcome {
                time: t,
                censored: false,
                component: d.component,
            });
        }
    }
    Ok(TrialOutcome {
        time: limit,
        censored: true,
        component: None,
    })
}

/// Every trial of the plan, in trial order.
pub fn run_trials(plan: &TrialPlan) -> Result<Vec<TrialOutcome>> {
    plan.validate()?;
    (0..plan.n_trials as u64)
        .into_par_iter()
        .map(|i| run_trial(plan, i))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    /// `-m / log(1 - p̂)` with a delta-method standard error.
    TailShortcut,
    /// Sample mean with the sample standard error.
    SampleMean,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
    pub n_trials: usize,
    pub method: Method,
    /// Trials that reached the cap (full runs) or the horizon (shortcut).
    pub censored: usize,
}

impl Estimate {
    /// Number of combined standard errors separating `self` from `reference`.
    pub fn z_score(&self, reference: f64, reference_se: f64) -> f64 {
        let se = (self.std_error.powi(2) + reference_se.powi(2)).sqrt();
        (self.value - reference) / se
    }
}

/// ARL from the fraction of trials stopping by `m`, assuming exponential
/// stopping times.
pub fn shortcut_from_fraction(hits: usize, n: usize, m: u64) -> Result<Estimate> {
    if hits == 0 {
        return Err(Error::Simulation(format!(
            "no trial stopped within the horizon m = {m}; increase the horizon or the number of trials"
        )));
    }
    if hits == n {
        return Err(Error::Simulation(format!(
            "every trial stopped within the horizon m = {m}; shorten the horizon"
        )));
    }
    let p = hits as f64 / n as f64;
    let l = (-p).ln_1p();
    let mf = m as f64;
    let value = -mf / l;
    let se = mf / ((1.0 - p) * l * l) * (p * (1.0 - p) / n as f64).sqrt();
    Ok(Estimate {
        value,
        std_error: se,
        n_trials: n,
        method: Method::TailShortcut,
        censored: n - hits,
    })
}

fn sample_mean(outcomes: &[TrialOutcome]) -> Estimate {
    let n = outcomes.len();
    let mean = outcomes.iter().map(|o| o.time as f64).collect::<KahanSum>().value() / n as f64;
    let var = if n > 1 {
        outcomes
            .iter()
            .map(|o| (o.time as f64 - mean).powi(2))
            .collect::<KahanSum>()
            .value()
            / (n - 1) as f64
    } else {
        0.0
    };
    Estimate {
        value: mean,
        std_error: (var / n as f64).sqrt(),
        n_trials: n,
        method: Method::SampleMean,
        censored: outcomes.iter().filter(|o| o.censored).count(),
    }
}

/// ARL under no change.
pub fn estimate_arl(plan: &TrialPlan) -> Result<Estimate> {
    if !plan.scenario.is_null() {
        return Err(Error::param("scenario", "ARL estimation needs the no-change scenario"));
    }
    let out = run_trials(plan)?;
    match plan.mode {
        Mode::TailShortcut => {
            let hits = out.iter().filter(|o| !o.censored).count();
            shortcut_from_fraction(hits, out.len(), plan.horizon.unwrap_or(plan.cap))
        }
        Mode::FullRun => {
            let e = sample_mean(&out);
            if e.censored as f64 > 0.01 * e.n_trials as f64 {
                return Err(Error::Simulation(format!(
                    "{} of {} runs reached the cap {}; raise the cap",
                    e.censored, e.n_trials, plan.cap
                )));
            }
            Ok(e)
        }
    }
}

/// Mean detection delay for a change at time 0. Censored runs count at the
/// cap and are reported in the estimate.
pub fn estimate_edd(plan: &TrialPlan) -> Result<Estimate> {
    if plan.scenario.is_null() || plan.scenario.change_point != Some(0) {
        return Err(Error::param(
            "scenario",
            "EDD estimation needs a change at time 0 with affected streams",
        ));
    }
    if plan.mode != Mode::FullRun {
        return Err(Error::param("mode", "EDD estimation uses full runs"));
    }
    Ok(sample_mean(&run_trials(plan)?))
}

/// Largest statistic of every component over `1..=m`, per trial, under the
/// plan's scenario. Stopping is ignored.
pub fn max_scores(spec: &DetectorSpec, scenario: &Scenario, m: u64, n_trials: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    scenario.validate()?;
    spec.build(scenario.n_streams)?;
    (0..n_trials as u64)
        .into_par_iter()
        .map(|i| {
            let mut det = spec.build(scenario.n_streams)?;
            let mut rng = trial_rng(seed, i);
            let mean = scenario.mean_vector();
            let mut y = vec![0.0; scenario.n_streams];
            let mut stats = Vec::new();
            let mut best = vec![f64::NEG_INFINITY; spec.n_components()];
            for t in 1..=m {
                scenario.sample_into(&mut rng, t, &mean, &mut y);
                det.observe(&y, &mut stats)?;
                for (b, s) in best.iter_mut().zip(&stats) {
                    *b = b.max(s.score);
                }
            }
            Ok(best)
        })
        .collect()
}

/// Threshold exceeded by a fraction `alpha` of the sample maxima.
pub fn threshold_for_tail(maxima: &[f64], alpha: f64) -> Result<f64> {
    if maxima.is_empty() {
        return Err(Error::param("trials", "no maxima to calibrate from"));
    }
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::param("alpha", format!("must lie in (0, 1], got {alpha}")));
    }
    if alpha >= 1.0 {
        return Ok(0.0);
    }
    let mut desc = maxima.to_vec();
    desc.sort_by(|a, b| b.total_cmp(a));
    let j = (alpha * desc.len() as f64).round() as usize;
    Ok(match j {
        0 => desc[0] + 1e-9 * (1.0 + desc[0].abs()),
        j if j >= desc.len() => desc[desc.len() - 1],
        j => 0.5 * (desc[j - 1] + desc[j]),
    })
}

/// Empirical thresholds, one per component.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub thresholds: Vec<f64>,
    /// Tail probability at the horizon for each component.
    pub alpha: f64,
    pub horizon: u64,
    pub n_trials: usize,
    /// Fraction of trials in which at least one component crosses its threshold.
    pub joint_tail: f64,
}

/// Choose each component's threshold so that `P{T <= m} = alpha` under no
/// change, using the same simulated paths for every candidate threshold.
pub fn calibrate_empirical(
    spec: &DetectorSpec,
    n_streams: usize,
    m: u64,
    alpha: f64,
    n_trials: usize,
    seed: u64,
) -> Result<Calibration> {
    if m == 0 {
        return Err(Error::param("horizon", "must be positive"));
    }
    let maxima = max_scores(spec, &Scenario::null(n_streams), m, n_trials, seed)?;
    calibration_from_maxima(&maxima, alpha, m)
}

pub fn calibration_from_maxima(maxima: &[Vec<f64>], alpha: f64, m: u64) -> Result<Calibration> {
    let k = maxima.first().map_or(0, |r| r.len());
    let thresholds = (0..k)
        .map(|c| threshold_for_tail(&maxima.iter().map(|r| r[c]).collect::<Vec<_>>(), alpha))
        .collect::<Result<Vec<_>>>()?;
    let joint = maxima
        .iter()
        .filter(|r| r.iter().zip(&thresholds).any(|(s, b)| s >= b))
        .count();
    Ok(Calibration {
        thresholds,
        alpha,
        horizon: m,
        n_trials: maxima.len(),
        joint_tail: joint as f64 / maxima.len() as f64,
    })
}

/// Kolmogorov distribution tail `P{K > x}`.
pub fn kolmogorov_sf(x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    if x < 0.3 {
        // The alternating series converges slowly here; the value is 1 to
        // double precision.
        return 1.0;
    }
    let mut s = 0.0;
    for k in 1..=100 {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * x * x).exp();
        s += if k % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * s).clamp(0.0, 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurvivalRow {
    pub m: f64,
    pub empirical: f64,
    /// `exp(-m / mean)` for the fitted exponential.
    pub fitted: f64,
    /// `exp(-m / ARL)` for a supplied theoretical ARL.
    pub theory: Option<f64>,
    /// Three binomial standard errors of the empirical value.
    pub band: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentialityReport {
    pub n: usize,
    pub censored: usize,
    /// Maximum-likelihood mean allowing for censoring.
    pub fitted_mean: f64,
    pub ks_statistic: f64,
    pub p_value: f64,
    pub survival: Vec<SurvivalRow>,
}

impl ExponentialityReport {
    pub fn rejected_at(&self, level: f64) -> bool {
        self.p_value < level
    }

    /// Largest gap between empirical and theoretical survival, in units of
    /// the band.
    pub fn worst_theory_gap(&self) -> Option<f64> {
        self.survival
            .iter()
            .filter_map(|r| r.theory.map(|t| (r.empirical - t).abs() / r.band.max(1e-12)))
            .reduce(f64::max)
    }
}

/// Compare stopping times with an exponential law fitted by maximum
/// likelihood. Censored values are excluded from the KS distance, which is
/// taken over the uncensored range.
pub fn exponentiality_report(outcomes: &[TrialOutcome], theory_arl: Option<f64>, grid_points: usize) -> Result<ExponentialityReport> {
    let n = outcomes.len();
    if n < 2 {
        return Err(Error::param("stopping times", "need at least two values"));
    }
    let censored = outcomes.iter().filter(|o| o.censored).count();
    let total: f64 = outcomes.iter().map(|o| o.time as f64).sum();
    let events = n - censored;
    if events == 0 {
        return Err(Error::Simulation("every stopping time is censored".into()));
    }
    let mean = total / events as f64;
    let cdf = |x: f64| -(-x / mean).exp_m1();

    let mut times: Vec<f64> = outcomes.iter().filter(|o| !o.censored).map(|o| o.time as f64).collect();
    times.sort_by(f64::total_cmp);
    let nf = n as f64;
    let mut d = 0.0f64;
    let mut i = 0;
    while i < times.len() {
        let x = times[i];
        let mut j = i;
        while j < times.len() && times[j] == x {
            j += 1;
        }
        let f = cdf(x);
        d = d.max((f - i as f64 / nf).abs()).max((j as f64 / nf - f).abs());
        i = j;
    }
    let sn = nf.sqrt();
    let p_value = kolmogorov_sf((sn + 0.12 + 0.11 / sn) * d);

    let top = outcomes.iter().map(|o| o.time).max().unwrap_or(0) as f64;
    let survival = (1..=grid_points.max(1))
        .map(|k| {
            let m = top * k as f64 / (grid_points.max(1) + 1) as f64;
            let emp = outcomes.iter().filter(|o| o.time as f64 > m).count() as f64 / nf;
            let fitted = (-m / mean).exp();
            let theory = theory_arl.map(|a| (-m / a).exp());
            let s = theory.unwrap_or(fitted);
            SurvivalRow {
                m,
                empirical: emp,
                fitted,
                theory,
                band: 3.0 * (s * (1.0 - s) / nf).sqrt(),
            }
        })
        .collect();
    Ok(ExponentialityReport {
        n,
        censored,
        fitted_mean: mean,
        ks_statistic: d,
        p_value,
        survival,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn t2(p0: f64, b: f64, m1: usize) -> DetectorSpec {
        DetectorSpec::Single(DetectorConfig::new(Rule::T2 { p0 }, b, 1, m1))
    }

    #[test]
    fn zero_threshold_stops_at_m0() {
        let spec = DetectorSpec::Single(DetectorConfig::new(Rule::T2 { p0: 0.1 }, 0.0, 3, 20));
        let plan = TrialPlan::full_run(spec, Scenario::null(5), 20, 100, 1);
        assert!(run_trials(&plan).unwrap().iter().all(|o| o.time == 3 && !o.censored));
    }

    #[test]
    fn trials_are_deterministic_and_order_free() {
        let plan = TrialPlan::full_run(t2(0.2, 6.0, 20), Scenario::null(8), 12, 2000, 99);
        let a = run_trials(&plan).unwrap();
        let b: Vec<_> = (0..12u64).rev().map(|i| run_trial(&plan, i).unwrap()).collect();
        let b: Vec<_> = b.into_iter().rev().collect();
        assert_eq!(a, b);
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let c = pool.install(|| run_trials(&plan).unwrap());
        assert_eq!(a, c);
        assert_ne!(run_trial(&plan, 0).unwrap(), run_trial(&plan, 1).unwrap());
    }

    #[test]
    fn strong_signal_stops_at_m0() {
        let sc = Scenario::immediate(5, 5, 50.0).unwrap();
        let plan = TrialPlan::edd(t2(0.5, 10.0, 20), sc, 20, 3);
        let e = estimate_edd(&plan).unwrap();
        assert_eq!(e.value, 1.0);
    }

    #[test]
    fn exponential_inversion() {
        // p̂ = 1 - e^{-1} at m = 5000 gives ARL 5000.
        let n = 1_000_000;
        let hits = ((1.0 - (-1.0f64).exp()) * n as f64).round() as usize;
        let e = shortcut_from_fraction(hits, n, 5000).unwrap();
        assert!((e.value - 5000.0).abs() < 1.0);
        assert!(shortcut_from_fraction(0, 10, 100).is_err());
        assert!(shortcut_from_fraction(10, 10, 100).is_err());
    }

    #[test]
    fn arl_requires_null() {
        let sc = Scenario::immediate(5, 1, 1.0).unwrap();
        let plan = TrialPlan::full_run(t2(0.5, 10.0, 20), sc, 5, 100, 3);
        assert!(estimate_arl(&plan).is_err());
        let bad = TrialPlan {
            mode: Mode::TailShortcut,
            horizon: None,
            ..TrialPlan::full_run(t2(0.5, 10.0, 20), Scenario::null(5), 5, 100, 3)
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn shortcut_agrees_with_full_runs() {
        // Cheap configuration with ARL in the low hundreds.
        let spec = t2(0.3, 7.0, 30);
        let full = estimate_arl(&TrialPlan::full_run(spec.clone(), Scenario::null(10), 400, 20_000, 5)).unwrap();
        let m = (full.value * 0.3).round() as u64;
        let short = estimate_arl(&TrialPlan::arl_shortcut(spec, 10, m, 400, 6)).unwrap();
        assert!(full.value > 80.0 && full.value < 2000.0, "{}", full.value);
        assert!(full.z_score(short.value, short.std_error).abs() < 2.0, "{full:?} {short:?}");
    }

    #[test]
    fn tail_threshold_order_statistics() {
        let x: Vec<f64> = (1..=100).map(|i| i as f64).collect();
        assert_eq!(threshold_for_tail(&x, 1.0).unwrap(), 0.0);
        assert_eq!(threshold_for_tail(&x, 0.05).unwrap(), 95.5);
        let mut prev = f64::INFINITY;
        for k in 1..=20 {
            let b = threshold_for_tail(&x, k as f64 * 0.05).unwrap();
            assert!(b <= prev);
            prev = b;
        }
        assert!(threshold_for_tail(&x, 0.0).is_err());
    }

    #[test]
    fn ks_self_test_and_negative_control() {
        let mut rng = trial_rng(11, 0);
        let sample: Vec<TrialOutcome> = (0..10_000)
            .map(|_| {
                let u: f64 = rng.random();
                TrialOutcome {
                    time: (-(1.0 - u).ln() * 1e6) as u64 + 1,
                    censored: false,
                    component: None,
                }
            })
            .collect();
        let r = exponentiality_report(&sample, Some(1e6), 10).unwrap();
        assert!(r.ks_statistic < 1.63 / 100.0, "{}", r.ks_statistic);
        assert!(!r.rejected_at(0.01));
        let fixed: Vec<TrialOutcome> = (0..200)
            .map(|_| TrialOutcome {
                time: 100,
                censored: false,
                component: None,
            })
            .collect();
        assert!(exponentiality_report(&fixed, None, 5).unwrap().rejected_at(0.01));
    }

    #[test]
    fn kolmogorov_reference_values() {
        assert!((kolmogorov_sf(1.36) - 0.0494).abs() < 5e-4);
        assert!((kolmogorov_sf(1.63) - 0.0098).abs() < 5e-4);
        assert_eq!(kolmogorov_sf(0.0), 1.0);
    }

    #[test]
    fn calibration_uses_common_paths() {
        let spec = DetectorSpec::Parallel {
            components: vec![(Rule::T2 { p0: 0.1 }, 0.0), (Rule::Max, 0.0)],
            m0: 1,
            m1: 20,
        };
        let a = calibrate_empirical(&spec, 6, 50, 0.1, 60, 4).unwrap();
        let b = calibrate_empirical(&spec, 6, 50, 0.2, 60, 4).unwrap();
        for (x, y) in a.thresholds.iter().zip(&b.thresholds) {
            assert!(x >= y);
        }
        assert!(a.joint_tail >= 0.1 && a.joint_tail <= 0.2 + 1e-12);
    }
}
