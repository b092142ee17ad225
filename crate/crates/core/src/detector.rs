// SPDX-License-Identifier: MIT OR Apache-2.0

//! Online stopping rules.
//!
//! Every window-limited rule evaluates, at each time `t`, the maximum over
//! candidate change-points `k` with `m0 <= t - k < m1` of a score summed (or
//! maximised) over streams, and stops once that maximum reaches `b`. Mei's
//! rule is the exception: it sums per-stream CUSUM statistics, each with its
//! own change-point, and needs no window.
//!
//! Several rules can share one set of prefix sums through
//! [`ParallelDetector`]; GLR-based components then also share the
//! exponentials of the window scan.

use serde::{Deserialize, Serialize};

use crate::profile::MatchedFilter;
use crate::score::{check_delta, check_p0, log_mix, GSpec};
use crate::stream::StreamState;
use crate::{Error, Result};

/// Stopping rule identity and its parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "kebab-case")]
pub enum Rule {
    /// Mixture over fixed-mean log-likelihoods `ℓ⁺`.
    T1 { p0: f64, delta: f64 },
    /// Mixture over log-GLR statistics.
    T2 { p0: f64 },
    /// Hard-thresholded fixed-mean log-likelihoods.
    T3 { p0: f64, delta: f64 },
    /// Hard-thresholded log-GLR statistics.
    T4 { p0: f64 },
    /// Largest single-stream log-GLR.
    Max,
    /// Sum of per-stream CUSUM statistics.
    Mei { delta: f64 },
    /// Sum of fixed-mean log-likelihoods without positive part.
    Tv { delta: f64 },
    /// Matched filter over candidate source locations; the statistic is the
    /// squared positive projection `[{Σ α_z(x_n) U_n}⁺]²`.
    Profile(Box<MatchedFilter>),
}

impl Rule {
    pub fn validate(&self, n_streams: usize) -> Result<()> {
        match self {
            Rule::T1 { p0, delta } | Rule::T3 { p0, delta } => {
                check_p0(*p0)?;
                check_delta(*delta)
            }
            Rule::T2 { p0 } | Rule::T4 { p0 } => check_p0(*p0),
            Rule::Max => Ok(()),
            Rule::Mei { delta } | Rule::Tv { delta } => check_delta(*delta),
            Rule::Profile(f) => {
                if f.n_sensors() != n_streams {
                    return Err(Error::Dimension {
                        expected: n_streams,
                        got: f.n_sensors(),
                    });
                }
                if f.n_candidates() == 0 {
                    return Err(Error::param("profile", "no candidate source locations"));
                }
                Ok(())
            }
        }
    }

    /// Score function used in the analytic approximations, where one exists.
    pub fn gspec(&self) -> Option<GSpec> {
        match *self {
            Rule::T1 { p0, delta } => GSpec::fixed_mixture(p0, delta).ok(),
            Rule::T2 { p0 } => GSpec::mixture(p0).ok(),
            Rule::T3 { p0, delta } => GSpec::fixed_hard(p0, delta).ok(),
            Rule::T4 { p0 } => GSpec::hard(p0).ok(),
            Rule::Max => Some(GSpec::max()),
            _ => None,
        }
    }

    pub fn is_windowed(&self) -> bool {
        !matches!(self, Rule::Mei { .. })
    }

    /// Short label such as `T2(0.1)` or `T3(0.1,1)`.
    pub fn label(&self) -> String {
        match self {
            Rule::T1 { p0, delta } => format!("T1({p0},{delta})"),
            Rule::T2 { p0 } => format!("T2({p0})"),
            Rule::T3 { p0, delta } => format!("T3({p0},{delta})"),
            Rule::T4 { p0 } => format!("T4({p0})"),
            Rule::Max => "Max".into(),
            Rule::Mei { delta } => format!("Mei({delta})"),
            Rule::Tv { delta } => format!("TV({delta})"),
            Rule::Profile(f) => format!("Profile({} candidates)", f.n_candidates()),
        }
    }
}

/// A rule with its threshold and window limits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectorConfig {
    pub rule: Rule,
    pub threshold: f64,
    pub m0: usize,
    pub m1: usize,
}

impl DetectorConfig {
    pub fn new(rule: Rule, threshold: f64, m0: usize, m1: usize) -> Self {
        Self {
            rule,
            threshold,
            m0,
            m1,
        }
    }

    pub fn validate(&self, n_streams: usize) -> Result<()> {
        if n_streams == 0 {
            return Err(Error::param("n_streams", "must be positive"));
        }
        if self.threshold.is_nan() {
            return Err(Error::param("threshold", "must not be NaN"));
        }
        validate_window(self.m0, self.m1)?;
        self.rule.validate(n_streams)
    }
}

fn validate_window(m0: usize, m1: usize) -> Result<()> {
    if m0 == 0 {
        return Err(Error::param("m0", "must be at least 1"));
    }
    if m0 >= m1 {
        return Err(Error::param("m1", format!("must exceed m0 = {m0}, got {m1}")));
    }
    Ok(())
}

/// Maximised statistic at one time step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepStat {
    pub time: u64,
    /// Maximum over candidate change-points; `-inf` before the first window.
    pub score: f64,
    /// Maximising change-point (ties go to the most recent `k`).
    pub argmax_k: Option<u64>,
}

/// Outcome of one step of a detector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Decision {
    pub stopped: bool,
    pub time: u64,
    pub argmax_k: Option<u64>,
    pub score: f64,
    /// Component that fired, for parallel detectors.
    pub component: Option<usize>,
}

#[derive(Debug, Clone, Copy, Default)]
struct Best {
    score: f64,
    w: usize,
}

impl Best {
    fn empty() -> Self {
        Self {
            score: f64::NEG_INFINITY,
            w: 0,
        }
    }

    #[inline]
    fn offer(&mut self, score: f64, w: usize) {
        if score > self.score {
            self.score = score;
            self.w = w;
        }
    }
}

/// Per-component running state beyond the shared prefix sums.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
enum Extra {
    None,
    /// CUSUM statistics `W_n` and the time of each stream's last restart.
    Mei { w: Vec<f64>, start: Vec<u64> },
    /// Ring of projected prefix sums, `n_candidates` values per time.
    Profile { ring: Vec<f64> },
    /// Last maximizing window of a mixture score.
    Mix { hint: usize },
}

const KNOTS: [f64; 7] = [0.0, 0.5, 1.0, 2.0, 4.0, 8.0, f64::MAX];
const NK: usize = KNOTS.len() - 1;
const WIDTHS: [f64; NK] = {
    let mut w = [0.0; NK];
    let mut j = 0;
    while j < NK {
        w[j] = KNOTS[j + 1] - KNOTS[j];
        j += 1;
    }
    w
};
/// Part of `x` falling in knot segment `j`.
#[inline(always)]
fn segment(x: f64, j: usize) -> f64 {
    let v = x - KNOTS[j];
    let v = if v > 0.0 { v } else { 0.0 };
    if v < WIDTHS[j] {
        v
    } else {
        WIDTHS[j]
    }
}


#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Component {
    rule: Rule,
    threshold: f64,
    extra: Extra,
}

/// Per-stream statistic of a window, from the prefix difference and a
/// per-window constant.
trait WindowStat: Copy {
    fn scale(&self, w: usize) -> f64;
    fn eval(&self, d: f64, a: f64) -> f64;
}

/// `(d⁺)² / 2w`
#[derive(Clone, Copy)]
struct Glr;

impl WindowStat for Glr {
    #[inline]
    fn scale(&self, w: usize) -> f64 {
        0.5 / w as f64
    }
    #[inline]
    fn eval(&self, d: f64, a: f64) -> f64 {
        let p = if d > 0.0 { d } else { 0.0 };
        p * p * a
    }
}

/// `(δd - δ²w/2)⁺`
#[derive(Clone, Copy)]
struct Fixed(f64);

impl WindowStat for Fixed {
    #[inline]
    fn scale(&self, w: usize) -> f64 {
        0.5 * self.0 * self.0 * w as f64
    }
    #[inline]
    fn eval(&self, d: f64, a: f64) -> f64 {
        let v = self.0 * d - a;
        if v > 0.0 {
            v
        } else {
            0.0
        }
    }
}

/// Shared machinery of [`Detector`] and [`ParallelDetector`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Engine {
    state: StreamState,
    m0: usize,
    m1: usize,
    components: Vec<Component>,
    #[serde(skip)]
    scratch: Vec<f64>,
}

impl Engine {
    fn new(n_streams: usize, m0: usize, m1: usize, comps: Vec<(Rule, f64)>) -> Result<Self> {
        validate_window(m0, m1)?;
        let state = StreamState::new(n_streams, m1)?;
        let components = comps
            .into_iter()
            .map(|(rule, threshold)| {
                if threshold.is_nan() {
                    return Err(Error::param("threshold", "must not be NaN"));
                }
                rule.validate(n_streams)?;
                let extra = match &rule {
                    Rule::Mei { .. } => Extra::Mei {
                        w: vec![0.0; n_streams],
                        start: vec![0; n_streams],
                    },
                    Rule::Profile(f) => Extra::Profile {
                        ring: vec![0.0; f.n_candidates() * (m1 + 1)],
                    },
                    Rule::T1 { .. } | Rule::T2 { .. } => Extra::Mix { hint: 0 },
                    _ => Extra::None,
                };
                Ok(Component {
                    rule,
                    threshold,
                    extra,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            state,
            m0,
            m1,
            components,
            scratch: Vec::new(),
        })
    }

    fn reset(&mut self) {
        self.state.reset();
        for c in &mut self.components {
            match &mut c.extra {
                Extra::None => {}
                Extra::Mei { w, start } => {
                    w.iter_mut().for_each(|x| *x = 0.0);
                    start.iter_mut().for_each(|x| *x = 0);
                }
                Extra::Profile { ring } => ring.iter_mut().for_each(|x| *x = 0.0),
                Extra::Mix { hint } => *hint = 0,
            }
        }
    }

    fn push(&mut self, y: &[f64]) -> Result<()> {
        self.state.push(y)?;
        let t = self.state.time();
        let slots = self.m1 as u64 + 1;
        for c in &mut self.components {
            match (&c.rule, &mut c.extra) {
                (Rule::Mei { delta }, Extra::Mei { w, start }) => {
                    let half = 0.5 * delta * delta;
                    for ((wn, sn), yn) in w.iter_mut().zip(start.iter_mut()).zip(y) {
                        if *wn <= 0.0 {
                            *wn = 0.0;
                            *sn = t - 1;
                        }
                        *wn += delta * yn - half;
                    }
                }
                (Rule::Profile(f), Extra::Profile { ring }) => {
                    let nc = f.n_candidates();
                    let prev = ((t - 1) % slots) as usize * nc;
                    let next = (t % slots) as usize * nc;
                    self.scratch.resize(nc, 0.0);
                    f.project(y, &mut self.scratch);
                    for i in 0..nc {
                        ring[next + i] = ring[prev + i] + self.scratch[i];
                    }
                }
                _ => {}
            }
        }
        Ok(())
    }

    /// Largest admissible window at the current time.
    fn w_max(&self) -> usize {
        let t = self.state.time() as usize;
        t.min(self.m1 - 1)
    }

    /// Evaluate every component at the current time.
    fn evaluate(&mut self, out: &mut Vec<StepStat>) {
        out.clear();
        let t = self.state.time();
        let mut bests = vec![Best::empty(); self.components.len()];

        // GLR-type components share one pass over (w, n).
        let glr: Vec<usize> = (0..self.components.len())
            .filter(|&i| {
                matches!(
                    self.components[i].rule,
                    Rule::T4 { .. } | Rule::Max
                )
            })
            .collect();
        if !glr.is_empty() {
            self.scan_glr(&glr, &mut bests);
        }
        for (i, c) in self.components.iter().enumerate() {
            match (&c.rule, &c.extra) {
                (Rule::T1 { p0, delta }, Extra::Mix { hint }) => {
                    self.scan_mix(*p0, Some(*delta), *hint, &mut bests[i])
                }
                (Rule::T2 { p0 }, Extra::Mix { hint }) => {
                    self.scan_mix(*p0, None, *hint, &mut bests[i])
                }
                _ => {}
            }
            match &c.rule {
                Rule::T3 { p0, delta } => self.scan_hard(*p0, *delta, &mut bests[i]),
                Rule::Tv { delta } => self.scan_tv(*delta, &mut bests[i]),
                Rule::Profile(f) => {
                    if let Extra::Profile { ring } = &c.extra {
                        self.scan_profile(f, ring, &mut bests[i]);
                    }
                }
                _ => {}
            }
        }
        for (c, b) in self.components.iter_mut().zip(&bests) {
            if let Extra::Mix { hint } = &mut c.extra {
                *hint = b.w;
            }
        }
        for (i, c) in self.components.iter().enumerate() {
            if let (Rule::Mei { .. }, Extra::Mei { w, start }) = (&c.rule, &c.extra) {
                if t == 0 {
                    out.push(StepStat {
                        time: t,
                        score: f64::NEG_INFINITY,
                        argmax_k: None,
                    });
                    continue;
                }
                let score: f64 = w.iter().sum();
                // Report the restart time of the stream contributing most.
                let lead = w
                    .iter()
                    .enumerate()
                    .fold((0, f64::NEG_INFINITY), |acc, (n, &x)| if x > acc.1 { (n, x) } else { acc })
                    .0;
                out.push(StepStat {
                    time: t,
                    score,
                    argmax_k: Some(start[lead]),
                });
                continue;
            }
            let b = bests[i];
            out.push(StepStat {
                time: t,
                score: b.score,
                argmax_k: (b.w > 0).then(|| t - b.w as u64),
            });
        }
    }

    fn scan_glr(&self, idx: &[usize], bests: &mut [Best]) {
        #[derive(Clone, Copy)]
        enum Kind {
            Mix { p0: f64, q0: f64 },
            Hard { lp: f64 },
            Max,
        }
        let kinds: Vec<Kind> = idx
            .iter()
            .map(|&i| match self.components[i].rule {
                Rule::T2 { p0 } => Kind::Mix { p0, q0: 1.0 - p0 },
                Rule::T4 { p0 } => Kind::Hard { lp: p0.ln() },
                _ => Kind::Max,
            })
            .collect();
        let need_exp = kinds.iter().any(|k| matches!(k, Kind::Mix { .. }));
        let t = self.state.time();
        let cur = self.state.current();
        let mut acc = vec![0.0f64; kinds.len()];
        for w in self.m0..=self.w_max() {
            let old = self.state.column_unchecked(t - w as u64);
            let hw = 0.5 / w as f64;
            acc.iter_mut().for_each(|a| *a = 0.0);
            let mut dmax = 0.0f64;
            for (c, o) in cur.iter().zip(old) {
                let d = c - o;
                if d <= 0.0 {
                    continue;
                }
                dmax = dmax.max(d);
                let x = d * d * hw;
                let e = if need_exp { (-x).exp() } else { 0.0 };
                for (a, k) in acc.iter_mut().zip(&kinds) {
                    match *k {
                        Kind::Mix { p0, q0 } => *a += x + (p0 + q0 * e).ln(),
                        Kind::Hard { lp } => {
                            if x + lp > 0.0 {
                                *a += x + lp
                            }
                        }
                        Kind::Max => {}
                    }
                }
            }
            for ((a, k), &i) in acc.iter().zip(&kinds).zip(idx) {
                let s = match k {
                    Kind::Max => dmax * dmax * hw,
                    _ => *a,
                };
                bests[i].offer(s, w);
            }
        }
    }

    /// Mixture scores over all windows. Windows whose chord bound falls
    /// below the running best are skipped, so the result is exact.
    fn scan_mix(&self, p0: f64, delta: Option<f64>, hint: usize, best: &mut Best) {
        match delta {
            None => self.scan_mix_with(p0, hint, best, Glr),
            Some(delta) => self.scan_mix_with(p0, hint, best, Fixed(delta)),
        }
    }

    fn scan_mix_with<F: WindowStat>(
        &self,
        p0: f64,
        hint: usize,
        best: &mut Best,
        stat: F,
    ) {
        let wmax = self.w_max();
        if wmax < self.m0 {
            return;
        }
        let t = self.state.time();
        let cur = self.state.current();
        let exact = |w: usize| -> f64 {
            let old = self.state.column_unchecked(t - w as u64);
            let a = stat.scale(w);
            let mut s = 0.0;
            for (c, o) in cur.iter().zip(old) {
                let x = stat.eval(c - o, a);
                if x > 0.0 {
                    s += log_mix(x, p0);
                }
            }
            s
        };
        // Piecewise chord through the knots, extended with slope one; the
        // score is convex with slope below one so this bounds it from above.
        let slopes: Vec<f64> = KNOTS
            .windows(2)
            .map(|k| (log_mix(k[1], p0) - log_mix(k[0], p0)) / (k[1] - k[0]))
            .collect();
        let chord = |w: usize| -> f64 {
            let old = self.state.column_unchecked(t - w as u64);
            let a = stat.scale(w);
            let mut lanes = [[0.0f64; 4]; NK];
            let mut cc = cur.chunks_exact(4);
            let mut oc = old.chunks_exact(4);
            for (c, o) in (&mut cc).zip(&mut oc) {
                for l in 0..4 {
                    let x = stat.eval(c[l] - o[l], a);
                    for j in 0..NK {
                        lanes[j][l] += segment(x, j);
                    }
                }
            }
            let mut acc = [0.0f64; NK];
            for (c, o) in cc.remainder().iter().zip(oc.remainder()) {
                let x = stat.eval(c - o, a);
                for j in 0..NK {
                    acc[j] += segment(x, j);
                }
            }
            for j in 0..NK {
                acc[j] += lanes[j].iter().sum::<f64>();
            }
            let mut s = 0.0;
            for j in 0..NK - 1 {
                s += slopes[j] * acc[j];
            }
            s + acc[NK - 1]
        };
        let start = (hint + 1).clamp(self.m0, wmax);
        let mut top = Best {
            score: exact(start),
            w: start,
        };
        for w in self.m0..=wmax {
            if w == start {
                continue;
            }
            let ub = chord(w);
            if ub + 1e-9 * (1.0 + ub.abs()) < top.score {
                continue;
            }
            let s = exact(w);
            if s > top.score || (s == top.score && w < top.w) {
                top = Best { score: s, w };
            }
        }
        *best = top;
    }

    fn scan_hard(&self, p0: f64, delta: f64, best: &mut Best) {
        let t = self.state.time();
        let cur = self.state.current();
        let lp = p0.ln();
        for w in self.m0..=self.w_max() {
            let old = self.state.column_unchecked(t - w as u64);
            let drift = 0.5 * delta * delta * w as f64;
            let mut s = 0.0;
            for (c, o) in cur.iter().zip(old) {
                let l = delta * (c - o) - drift;
                if l + lp > 0.0 {
                    s += l + lp;
                }
            }
            best.offer(s, w);
        }
    }

    fn scan_tv(&self, delta: f64, best: &mut Best) {
        let t = self.state.time();
        let cur: f64 = self.state.current().iter().sum();
        let n = self.state.n_streams() as f64;
        for w in self.m0..=self.w_max() {
            let old: f64 = self.state.column_unchecked(t - w as u64).iter().sum();
            let s = delta * (cur - old) - 0.5 * n * delta * delta * w as f64;
            best.offer(s, w);
        }
    }

    fn scan_profile(&self, f: &MatchedFilter, ring: &[f64], best: &mut Best) {
        let t = self.state.time();
        let nc = f.n_candidates();
        let slots = self.m1 as u64 + 1;
        let cur = &ring[(t % slots) as usize * nc..][..nc];
        for w in self.m0..=self.w_max() {
            let o = ((t - w as u64) % slots) as usize * nc;
            let old = &ring[o..o + nc];
            let dmax = cur
                .iter()
                .zip(old)
                .fold(0.0f64, |m, (c, o)| m.max(c - o));
            best.offer(dmax * dmax / w as f64, w);
        }
    }
}

/// A single stopping rule run online over `N` streams.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Detector {
    config: DetectorConfig,
    engine: Engine,
    #[serde(skip)]
    stats: Vec<StepStat>,
}

impl Detector {
    pub fn new(config: DetectorConfig, n_streams: usize) -> Result<Self> {
        config.validate(n_streams)?;
        let engine = Engine::new(
            n_streams,
            config.m0,
            config.m1,
            vec![(config.rule.clone(), config.threshold)],
        )?;
        Ok(Self {
            config,
            engine,
            stats: Vec::with_capacity(1),
        })
    }

    pub fn config(&self) -> &DetectorConfig {
        &self.config
    }

    pub fn n_streams(&self) -> usize {
        self.engine.state.n_streams()
    }

    pub fn time(&self) -> u64 {
        self.engine.state.time()
    }

    pub fn state(&self) -> &StreamState {
        &self.engine.state
    }

    pub fn threshold(&self) -> f64 {
        self.config.threshold
    }

    pub fn set_threshold(&mut self, b: f64) {
        self.config.threshold = b;
        self.engine.components[0].threshold = b;
    }

    /// Push `y` and return the maximised statistic without thresholding.
    pub fn observe(&mut self, y: &[f64]) -> Result<StepStat> {
        self.engine.push(y)?;
        self.engine.evaluate(&mut self.stats);
        Ok(self.stats[0])
    }

    /// Push `y` and compare the statistic with the threshold.
    pub fn step(&mut self, y: &[f64]) -> Result<Decision> {
        let s = self.observe(y)?;
        Ok(Decision {
            stopped: s.score >= self.config.threshold,
            time: s.time,
            argmax_k: s.argmax_k,
            score: s.score,
            component: None,
        })
    }

    /// Run over a sequence of observation vectors until the first stop.
    pub fn run<'a, I>(&mut self, rows: I) -> Result<Option<Decision>>
    where
        I: IntoIterator<Item = &'a [f64]>,
    {
        for y in rows {
            let d = self.step(y)?;
            if d.stopped {
                return Ok(Some(d));
            }
        }
        Ok(None)
    }

    pub fn reset(&mut self) {
        self.engine.reset();
    }
}

/// Several rules on the same streams; stops as soon as any component does.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParallelDetector {
    engine: Engine,
    #[serde(skip)]
    stats: Vec<StepStat>,
}

impl ParallelDetector {
    /// Components as `(rule, threshold)` pairs sharing the window `(m0, m1)`.
    pub fn new(components: Vec<(Rule, f64)>, n_streams: usize, m0: usize, m1: usize) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::param("components", "parallel detector needs at least one component"));
        }
        Ok(Self {
            engine: Engine::new(n_streams, m0, m1, components)?,
            stats: Vec::new(),
        })
    }

    pub fn n_components(&self) -> usize {
        self.engine.components.len()
    }

    pub fn time(&self) -> u64 {
        self.engine.state.time()
    }

    pub fn thresholds(&self) -> Vec<f64> {
        self.engine.components.iter().map(|c| c.threshold).collect()
    }

    pub fn set_thresholds(&mut self, b: &[f64]) -> Result<()> {
        if b.len() != self.engine.components.len() {
            return Err(Error::Dimension {
                expected: self.engine.components.len(),
                got: b.len(),
            });
        }
        for (c, &x) in self.engine.components.iter_mut().zip(b) {
            c.threshold = x;
        }
        Ok(())
    }

    /// Push `y` and return every component's statistic.
    pub fn observe(&mut self, y: &[f64]) -> Result<&[StepStat]> {
        self.engine.push(y)?;
        self.engine.evaluate(&mut self.stats);
        Ok(&self.stats)
    }

    /// Stops when at least one component reaches its threshold; the first
    /// such component (in construction order) is reported.
    pub fn step(&mut self, y: &[f64]) -> Result<Decision> {
        self.engine.push(y)?;
        self.engine.evaluate(&mut self.stats);
        let fired = self
            .stats
            .iter()
            .zip(&self.engine.components)
            .position(|(s, c)| s.score >= c.threshold);
        let pick = fired.unwrap_or_else(|| {
            // Report the component closest to its threshold.
            self.stats
                .iter()
                .zip(&self.engine.components)
                .enumerate()
                .fold((0, f64::NEG_INFINITY), |acc, (i, (s, c))| {
                    let margin = s.score - c.threshold;
                    if margin > acc.1 {
                        (i, margin)
                    } else {
                        acc
                    }
                })
                .0
        });
        let s = self.stats[pick];
        Ok(Decision {
            stopped: fired.is_some(),
            time: s.time,
            argmax_k: s.argmax_k,
            score: s.score,
            component: fired,
        })
    }

    pub fn reset(&mut self) {
        self.engine.reset();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::score::{score_fixed, score_hard_glr, score_mixture_glr, FixedVariant};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn gaussian_rows(n: usize, steps: usize, seed: u64, shift: &[f64]) -> Vec<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..steps)
            .map(|_| {
                (0..n)
                    .map(|i| {
                        let z: f64 = StandardNormal.sample(&mut rng);
                        z + shift.get(i).copied().unwrap_or(0.0)
                    })
                    .collect()
            })
            .collect()
    }

    /// Direct evaluation through the stream statistics and the score functions.
    fn brute_force(rule: &Rule, st: &StreamState, m0: usize, m1: usize) -> (f64, Option<u64>) {
        let t = st.time();
        let n = st.n_streams();
        let mut best = (f64::NEG_INFINITY, None);
        let wmax = (t as usize).min(m1 - 1);
        for w in m0..=wmax {
            let k = t - w as u64;
            let u: Vec<f64> = (0..n).map(|i| st.u_stat(k, i).unwrap()).collect();
            let s = match rule {
                Rule::T2 { p0 } => score_mixture_glr(&u, *p0).unwrap(),
                Rule::T4 { p0 } => score_hard_glr(&u, *p0).unwrap(),
                Rule::Max => (0..n).map(|i| st.glr_stat(k, i).unwrap()).fold(0.0, f64::max),
                Rule::T1 { p0, delta } | Rule::T3 { p0, delta } => {
                    let l: Vec<f64> = (0..n).map(|i| st.loglik_fixed(k, i, *delta).unwrap()).collect();
                    let v = if matches!(rule, Rule::T1 { .. }) {
                        FixedVariant::Mixture
                    } else {
                        FixedVariant::Hard
                    };
                    score_fixed(&l, *p0, v).unwrap()
                }
                Rule::Tv { delta } => (0..n).map(|i| st.loglik_fixed(k, i, *delta).unwrap()).sum(),
                _ => unreachable!(),
            };
            if s > best.0 {
                best = (s, Some(k));
            }
        }
        best
    }

    #[test]
    fn window_rules_agree_with_direct_evaluation() {
        let rules = [
            Rule::T1 { p0: 0.2, delta: 0.8 },
            Rule::T2 { p0: 0.1 },
            Rule::T3 { p0: 0.1, delta: 1.0 },
            Rule::T4 { p0: 0.3 },
            Rule::Max,
            Rule::Tv { delta: 0.5 },
        ];
        let rows = gaussian_rows(6, 60, 42, &[0.0, 0.0, 0.8, 0.0, 0.4, 0.0]);
        for rule in rules {
            let (m0, m1) = (2, 17);
            let mut det = Detector::new(DetectorConfig::new(rule.clone(), f64::INFINITY, m0, m1), 6).unwrap();
            let mut st = StreamState::new(6, m1).unwrap();
            for y in &rows {
                let s = det.observe(y).unwrap();
                st.push(y).unwrap();
                let (bs, bk) = brute_force(&rule, &st, m0, m1);
                if bk.is_none() {
                    assert_eq!(s.score, f64::NEG_INFINITY);
                    continue;
                }
                assert!((s.score - bs).abs() < 1e-9 * (1.0 + bs.abs()), "{rule:?}: {} vs {bs}", s.score);
                assert_eq!(s.argmax_k, bk, "{rule:?}");
            }
        }
    }

    #[test]
    fn pruned_mixture_scan_matches_direct_evaluation() {
        let mut means = vec![0.0; 37];
        means[3] = 2.5;
        means[10] = 0.6;
        means[36] = 1.2;
        let rows = gaussian_rows(37, 120, 9, &means);
        for rule in [Rule::T2 { p0: 0.02 }, Rule::T2 { p0: 0.7 }, Rule::T1 { p0: 0.05, delta: 1.5 }] {
            let (m0, m1) = (1, 45);
            let mut det = Detector::new(DetectorConfig::new(rule.clone(), f64::INFINITY, m0, m1), 37).unwrap();
            let mut st = StreamState::new(37, m1).unwrap();
            for y in &rows {
                let s = det.observe(y).unwrap();
                st.push(y).unwrap();
                let (bs, bk) = brute_force(&rule, &st, m0, m1);
                assert!((s.score - bs).abs() < 1e-9 * (1.0 + bs.abs()), "{rule:?}: {} vs {bs}", s.score);
                assert_eq!(s.argmax_k, bk, "{rule:?}");
            }
        }
    }

    #[test]
    fn zero_threshold_stops_at_first_window() {
        for rule in [Rule::T2 { p0: 0.1 }, Rule::T4 { p0: 0.1 }, Rule::Max, Rule::T3 { p0: 0.5, delta: 1.0 }] {
            let mut det = Detector::new(DetectorConfig::new(rule, 0.0, 3, 10), 4).unwrap();
            let rows = gaussian_rows(4, 5, 1, &[]);
            let d: Vec<_> = rows.iter().map(|y| det.step(y).unwrap()).collect();
            assert!(!d[0].stopped && !d[1].stopped);
            assert!(d[2].stopped);
            assert_eq!(d[2].time, 3);
        }
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let mut det = Detector::new(DetectorConfig::new(Rule::T2 { p0: 0.1 }, 5.0, 1, 10), 3).unwrap();
        assert!(matches!(det.step(&[0.0, 1.0]), Err(Error::Dimension { .. })));
    }

    #[test]
    fn invalid_configs() {
        assert!(Detector::new(DetectorConfig::new(Rule::T2 { p0: 0.0 }, 5.0, 1, 10), 3).is_err());
        assert!(Detector::new(DetectorConfig::new(Rule::T2 { p0: 0.5 }, 5.0, 10, 10), 3).is_err());
        assert!(Detector::new(DetectorConfig::new(Rule::T2 { p0: 0.5 }, 5.0, 0, 10), 3).is_err());
        assert!(Detector::new(DetectorConfig::new(Rule::Mei { delta: -1.0 }, 5.0, 1, 10), 3).is_err());
        assert!(ParallelDetector::new(vec![], 3, 1, 10).is_err());
    }

    #[test]
    fn mei_recursion_matches_brute_force() {
        let delta = 0.9;
        let rows = gaussian_rows(5, 80, 9, &[0.5, 0.0, 0.0, 1.0, 0.0]);
        let mut det = Detector::new(DetectorConfig::new(Rule::Mei { delta }, f64::INFINITY, 1, 2), 5).unwrap();
        for t in 1..=rows.len() {
            let s = det.observe(&rows[t - 1]).unwrap();
            // Σ_n max_{0<=k<t} ℓ_n(t, k, δ)
            let mut total = 0.0;
            for n in 0..5 {
                let mut best = f64::NEG_INFINITY;
                for k in 0..t {
                    let l: f64 = rows[k..t].iter().map(|y| delta * y[n] - delta * delta / 2.0).sum();
                    best = best.max(l);
                }
                total += best;
            }
            assert!((s.score - total).abs() < 1e-10, "t={t}: {} vs {total}", s.score);
        }
    }

    #[test]
    fn mei_constant_signal_grows_linearly() {
        let delta = 1.3;
        let mut det = Detector::new(DetectorConfig::new(Rule::Mei { delta }, f64::INFINITY, 1, 2), 1).unwrap();
        let mut prev: Option<f64> = None;
        for _ in 0..10 {
            let s = det.observe(&[delta]).unwrap().score;
            if let Some(p) = prev {
                assert!((s - p - delta * delta / 2.0).abs() < 1e-12);
            }
            prev = Some(s);
        }
        assert_eq!(det.observe(&[delta]).unwrap().argmax_k, Some(0));
    }

    #[test]
    fn tv_with_full_signal() {
        // All streams at mean δ from t = 1: statistic N δ² t / 2 at k = 0.
        let (n, delta) = (3, 0.6);
        let mut det = Detector::new(DetectorConfig::new(Rule::Tv { delta }, f64::INFINITY, 1, 100), n).unwrap();
        for t in 1..=20u64 {
            let s = det.observe(&vec![delta; n]).unwrap();
            assert!((s.score - n as f64 * delta * delta * t as f64 / 2.0).abs() < 1e-10);
            assert_eq!(s.argmax_k, Some(0));
        }
    }

    #[test]
    fn tv_equals_t3_with_unit_p0_when_all_positive() {
        let (n, delta) = (4, 0.5);
        let mut tv = Detector::new(DetectorConfig::new(Rule::Tv { delta }, f64::INFINITY, 1, 30), n).unwrap();
        let mut t3 = Detector::new(DetectorConfig::new(Rule::T3 { p0: 1.0, delta }, f64::INFINITY, 1, 30), n).unwrap();
        // Strong signal in every stream keeps every ℓ positive.
        for y in gaussian_rows(n, 25, 4, &[6.0; 4]).iter().map(|r| r.iter().map(|v| v.max(1.0)).collect::<Vec<_>>()) {
            let a = tv.observe(&y).unwrap();
            let b = t3.observe(&y).unwrap();
            assert!((a.score - b.score).abs() < 1e-9);
        }
    }

    #[test]
    fn tv_negative_drift_of_unaffected_stream() {
        // Paired comparison on one path: TV pays for the null stream, T3(1, δ) does not.
        let delta = 1.0;
        let rows = gaussian_rows(2, 40, 8, &[1.0, 0.0]);
        let mut tv = Detector::new(DetectorConfig::new(Rule::Tv { delta }, f64::INFINITY, 1, 100), 2).unwrap();
        let mut t3 = Detector::new(DetectorConfig::new(Rule::T3 { p0: 1.0, delta }, f64::INFINITY, 1, 100), 2).unwrap();
        let mut last = (0.0, 0.0);
        for y in &rows {
            last = (tv.observe(y).unwrap().score, t3.observe(y).unwrap().score);
            assert!(last.0 <= last.1 + 1e-12);
        }
        assert!(last.1 - last.0 > 5.0);
    }

    #[test]
    fn stopping_time_is_monotone_in_threshold() {
        let rows = gaussian_rows(10, 300, 77, &[0.4, 0.4, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        for rule in [Rule::T2 { p0: 0.2 }, Rule::T4 { p0: 0.2 }, Rule::Max, Rule::Mei { delta: 1.0 }, Rule::T3 { p0: 0.2, delta: 1.0 }] {
            let mut prev = 0u64;
            for b in [0.5, 2.0, 4.0, 6.0, 8.0, 12.0] {
                let mut det = Detector::new(DetectorConfig::new(rule.clone(), b, 1, 50), 10).unwrap();
                let stop = det
                    .run(rows.iter().map(|r| r.as_slice()))
                    .unwrap()
                    .map(|d| d.time)
                    .unwrap_or(u64::MAX);
                assert!(stop >= prev, "{rule:?} b={b}");
                prev = stop;
            }
        }
    }

    #[test]
    fn permutation_invariance() {
        let rows = gaussian_rows(5, 40, 13, &[0.0, 0.9, 0.0, 0.0, 0.3]);
        let perm = [3, 0, 4, 1, 2];
        for rule in [
            Rule::T1 { p0: 0.3, delta: 1.0 },
            Rule::T2 { p0: 0.3 },
            Rule::T3 { p0: 0.3, delta: 1.0 },
            Rule::T4 { p0: 0.3 },
            Rule::Max,
            Rule::Mei { delta: 1.0 },
            Rule::Tv { delta: 1.0 },
        ] {
            let mut a = Detector::new(DetectorConfig::new(rule.clone(), 9.0, 1, 25), 5).unwrap();
            let mut b = Detector::new(DetectorConfig::new(rule.clone(), 9.0, 1, 25), 5).unwrap();
            for y in &rows {
                let yp: Vec<f64> = perm.iter().map(|&i| y[i]).collect();
                let da = a.step(y).unwrap();
                let db = b.step(&yp).unwrap();
                assert!((da.score - db.score).abs() < 1e-9 * (1.0 + da.score.abs()));
                assert_eq!(da.stopped, db.stopped);
            }
        }
    }

    #[test]
    fn parallel_stops_at_first_component() {
        let rows = gaussian_rows(20, 200, 5, &[0.7; 3]);
        let comps = vec![(Rule::T2 { p0: 0.02 }, 14.0), (Rule::T2 { p0: 0.33 }, 25.0)];
        let mut par = ParallelDetector::new(comps.clone(), 20, 1, 50).unwrap();
        let stops: Vec<Option<u64>> = comps
            .iter()
            .map(|(r, b)| {
                let mut d = Detector::new(DetectorConfig::new(r.clone(), *b, 1, 50), 20).unwrap();
                d.run(rows.iter().map(|r| r.as_slice())).unwrap().map(|x| x.time)
            })
            .collect();
        let expected = stops.iter().flatten().min().copied();
        let mut got = None;
        for y in &rows {
            let d = par.step(y).unwrap();
            if d.stopped {
                got = Some(d.time);
                let c = d.component.unwrap();
                assert_eq!(stops[c], Some(d.time));
                break;
            }
        }
        assert_eq!(got, expected);
    }

    #[test]
    fn parallel_with_zero_threshold_stops_at_m0() {
        let mut par =
            ParallelDetector::new(vec![(Rule::T2 { p0: 0.02 }, 0.0), (Rule::T2 { p0: 0.33 }, 50.0)], 3, 2, 10).unwrap();
        let rows = gaussian_rows(3, 5, 2, &[]);
        assert!(!par.step(&rows[0]).unwrap().stopped);
        let d = par.step(&rows[1]).unwrap();
        assert!(d.stopped);
        assert_eq!((d.time, d.component), (2, Some(0)));
    }

    #[test]
    fn snapshot_restore_continues_identically() {
        let rows = gaussian_rows(4, 60, 21, &[0.5]);
        let mut a = Detector::new(DetectorConfig::new(Rule::Mei { delta: 1.0 }, 1e9, 1, 20), 4).unwrap();
        let mut p = ParallelDetector::new(vec![(Rule::T2 { p0: 0.1 }, 1e9), (Rule::Max, 1e9)], 4, 1, 20).unwrap();
        for y in &rows[..30] {
            a.step(y).unwrap();
            p.step(y).unwrap();
        }
        let mut a2: Detector = serde_json::from_str(&serde_json::to_string(&a).unwrap()).unwrap();
        let mut p2: ParallelDetector = serde_json::from_str(&serde_json::to_string(&p).unwrap()).unwrap();
        for y in &rows[30..] {
            assert_eq!(a.step(y).unwrap(), a2.step(y).unwrap());
            assert_eq!(p.step(y).unwrap(), p2.step(y).unwrap());
        }
    }
}
