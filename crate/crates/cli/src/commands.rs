//! The subcommands, each producing a report from a merged configuration.

use std::io::Read;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use mixdetect::analytics::{arl, arl_glr_details, calibrate_threshold, tail_from_arl, NuMethod};
use mixdetect::detector::{Decision, Detector, ParallelDetector};
use mixdetect::montecarlo::{calibrate_empirical, estimate_arl, estimate_edd, DetectorSpec, TrialPlan};
use mixdetect::score::ScoreKind;
use mixdetect::stream::StreamState;

use crate::config::RunConfig;
use crate::golden::golden;
use crate::records::{Record, Report};
use crate::reproduce::{self, Options, Table};
use crate::study::{theory_arl, theory_edd};

/// Default cap for full runs.
pub const DEFAULT_CAP: u64 = 1_000_000;

/// Threshold from an analytic ARL target or from a simulated tail probability.
pub fn calibrate(cfg: &RunConfig) -> Result<Report> {
    cfg.validate()?;
    let mut rep = Report::default();
    let n = cfg.n_streams()?;
    let (m0, m1) = (cfg.m0(), cfg.m1());
    if let Some(target) = cfg.target_arl {
        let rule = cfg.single_rule()?;
        let g = rule
            .gspec()
            .filter(|_| theory_arl(&rule, n, 1.0, m0, m1).is_some())
            .ok_or_else(|| anyhow!("no analytic ARL for rule {}; use alpha and horizon instead", rule.label()))?;
        let b = calibrate_threshold(&g, n, target, m0, m1)?;
        rep.push(Record::new("calibrate", "threshold", b));
        rep.push(Record::new("calibrate", "ARL at threshold", arl(&g, n, b, m0, m1)?));
        if !g.is_fixed_mean() && g.kind != ScoreKind::Max {
            let d = arl_glr_details(&g, n, b, m0, m1, NuMethod::Approx)?;
            rep.push(Record::new("calibrate", "theta", d.theta));
            rep.push(Record::new("calibrate", "psi(theta)", d.psi));
            rep.push(Record::new("calibrate", "psi'(theta)", d.psi_dot));
            rep.push(Record::new("calibrate", "psi''(theta)", d.psi_ddot));
            rep.push(Record::new("calibrate", "gamma(theta)", d.gamma));
            let series = arl_glr_details(&g, n, b, m0, m1, NuMethod::Series)?;
            rep.push(Record::new("calibrate", "ARL with series nu", series.arl));
        }
        let horizons = match cfg.horizon {
            Some(h) => vec![h as f64],
            None => [0.01, 0.1, 0.5, 1.0].iter().map(|f| f * target).collect(),
        };
        for m in horizons {
            let t = tail_from_arl(target, m);
            rep.push(Record::new("calibrate", format!("P(T <= {m}) linear"), t.linear));
            rep.push(Record::new("calibrate", format!("P(T <= {m}) exponential"), t.exponential));
        }
    } else if let (Some(alpha), Some(m)) = (cfg.alpha, cfg.horizon) {
        let spec = cfg.detector_spec_or(Some(f64::INFINITY))?;
        let cal = calibrate_empirical(&spec, n, m, alpha, cfg.trials(), cfg.seed())?;
        for (i, b) in cal.thresholds.iter().enumerate() {
            let label = if cal.thresholds.len() == 1 {
                "threshold".to_string()
            } else {
                format!("threshold component {}", i + 1)
            };
            rep.push(Record::new("calibrate", label, *b));
        }
        rep.push(Record::new("calibrate", "joint tail at thresholds", cal.joint_tail));
    } else {
        bail!("give target_arl, or alpha together with horizon");
    }
    rep.stamp(&cfg.hash(), Some(cfg.seed()));
    Ok(rep)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SimMode {
    Arl,
    Edd,
}

pub fn simulate(cfg: &RunConfig, mode: SimMode) -> Result<Report> {
    cfg.validate()?;
    let spec = cfg.detector_spec()?;
    let n = cfg.n_streams()?;
    let mut rep = Report::default();
    let single = match &spec {
        DetectorSpec::Single(c) => Some(c.clone()),
        DetectorSpec::Parallel { .. } => None,
    };
    match mode {
        SimMode::Arl => {
            let plan = match cfg.horizon {
                Some(h) => TrialPlan::arl_shortcut(spec.clone(), n, h, cfg.trials(), cfg.seed()),
                None => TrialPlan::full_run(
                    spec.clone(),
                    mixdetect::scenario::Scenario::null(n),
                    cfg.trials(),
                    cfg.cap.unwrap_or(DEFAULT_CAP),
                    cfg.seed(),
                ),
            };
            let est = estimate_arl(&plan)?;
            let mut r = Record::new("simulate", "ARL", est.value).se(est.std_error);
            if let Some(c) = &single {
                match theory_arl(&c.rule, n, c.threshold, c.m0, c.m1) {
                    Some(Ok(a)) => r = r.theory(a),
                    Some(Err(e)) => rep.note(format!("no analytic ARL: {e}")),
                    None => {}
                }
            }
            rep.push(r);
            rep.push(Record::new("simulate", "censored trials", est.censored as f64));
        }
        SimMode::Edd => {
            let scen = cfg.scenario()?;
            if scen.is_null() {
                bail!("detection delay needs a [scenario] with a change");
            }
            let est = estimate_edd(&TrialPlan::edd(spec.clone(), scen.clone(), cfg.trials(), cfg.seed()))?;
            let mut r = Record::new("simulate", "EDD", est.value).se(est.std_error);
            if let Some(c) = &single {
                match theory_edd(&c.rule, c.threshold, &scen, c.m0, c.m1) {
                    Some(Ok(a)) => {
                        for w in &a.warnings {
                            rep.note(w.clone());
                        }
                        r = r.theory(a.value);
                    }
                    Some(Err(e)) => rep.note(format!("no analytic delay: {e}")),
                    None => {}
                }
            }
            rep.push(r);
            rep.push(Record::new("simulate", "censored trials", est.censored as f64));
        }
    }
    rep.stamp(&cfg.hash(), Some(cfg.seed()));
    Ok(rep)
}

/// Analytic quantities only.
pub fn analytic(cfg: &RunConfig) -> Result<Report> {
    cfg.validate()?;
    let n = cfg.n_streams()?;
    let (m0, m1) = (cfg.m0(), cfg.m1());
    let rule = cfg.single_rule()?;
    let b = cfg.threshold()?;
    let mut rep = Report::default();
    let a = theory_arl(&rule, n, b, m0, m1).ok_or_else(|| anyhow!("no analytic ARL for rule {}", rule.label()))??;
    rep.push(Record::new("analytic", "ARL", a));
    if let Some(h) = cfg.horizon {
        rep.push(Record::new("analytic", format!("P(T <= {h})"), tail_from_arl(a, h as f64).exponential));
    }
    if cfg.scenario.is_some() {
        let scen = cfg.scenario()?;
        if let Some(e) = theory_edd(&rule, b, &scen, m0, m1) {
            let e = e?;
            for w in &e.warnings {
                rep.note(w.clone());
            }
            rep.push(Record::new("analytic", "EDD", e.value));
        }
    }
    rep.stamp(&cfg.hash(), None);
    Ok(rep)
}

/// Outcome of a detection run over a data file.
#[derive(Debug, Clone, PartialEq)]
pub struct Detection {
    pub decision: Option<Decision>,
    pub rows: u64,
    /// Streams with the largest `U` at the estimated change-point.
    pub contributors: Vec<(usize, f64)>,
}

/// Observation rows from CSV text; a first row that does not parse as
/// numbers is taken as a header.
pub fn parse_rows(text: &str, expect: Option<usize>) -> Result<Vec<Vec<f64>>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut rows = Vec::new();
    let mut width = expect;
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.with_context(|| format!("row {}", i + 1))?;
        if rec.iter().all(|f| f.is_empty()) {
            continue;
        }
        if i == 0 && rec.iter().any(|f| f.parse::<f64>().is_err()) {
            if let Some(w) = width {
                if rec.len() != w {
                    bail!("header has {} columns, expected {w}", rec.len());
                }
            }
            width = Some(rec.len());
            continue;
        }
        let w = *width.get_or_insert(rec.len());
        if rec.len() != w {
            bail!("row {}: expected {w} columns, found {}", i + 1, rec.len());
        }
        let row = rec
            .iter()
            .enumerate()
            .map(|(j, f)| {
                let v: f64 = f
                    .parse()
                    .map_err(|_| anyhow!("row {}, column {}: {f:?} is not a number", i + 1, j + 1))?;
                if !v.is_finite() {
                    bail!("row {}, column {}: value is not finite", i + 1, j + 1);
                }
                Ok(v)
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    Ok(rows)
}

enum Online {
    Single(Detector),
    Parallel(ParallelDetector),
}

/// Run the configured detector over `rows` until it stops.
pub fn detect_rows(cfg: &RunConfig, rows: &[Vec<f64>], top: usize) -> Result<Detection> {
    let spec = cfg.detector_spec()?;
    let n = rows.first().map(|r| r.len()).or(cfg.n).ok_or_else(|| anyhow!("no observations"))?;
    let mut det = match spec {
        DetectorSpec::Single(c) => Online::Single(Detector::new(c, n)?),
        DetectorSpec::Parallel { components, m0, m1 } => Online::Parallel(ParallelDetector::new(components, n, m0, m1)?),
    };
    let mut state = StreamState::new(n, cfg.m1())?;
    let mut count = 0;
    for y in rows {
        state.push(y)?;
        count += 1;
        let d = match &mut det {
            Online::Single(d) => d.step(y)?,
            Online::Parallel(d) => d.step(y)?,
        };
        if d.stopped {
            let mut contributors = Vec::new();
            if let Some(k) = d.argmax_k {
                contributors = (0..n).map(|i| Ok((i, state.u_stat(k, i)?))).collect::<Result<Vec<_>>>()?;
                contributors.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
                contributors.truncate(top);
            }
            return Ok(Detection {
                decision: Some(d),
                rows: count,
                contributors,
            });
        }
    }
    Ok(Detection {
        decision: None,
        rows: count,
        contributors: Vec::new(),
    })
}

/// Detection over a CSV file, or standard input for `-`.
pub fn detect(cfg: &RunConfig, input: &Path, top: usize) -> Result<(Report, Detection)> {
    let mut text = String::new();
    if input.as_os_str() == "-" {
        std::io::stdin().read_to_string(&mut text)?;
    } else {
        text = std::fs::read_to_string(input).with_context(|| format!("reading {}", input.display()))?;
    }
    let rows = parse_rows(&text, cfg.n)?;
    let mut cfg = cfg.clone();
    if cfg.n.is_none() && cfg.grid.is_none() {
        cfg.n = rows.first().map(|r| r.len());
    }
    cfg.validate()?;
    let det = detect_rows(&cfg, &rows, top)?;
    let mut rep = Report::default();
    match &det.decision {
        Some(d) => {
            rep.push(Record::new("detect", "stopping time", d.time as f64));
            if let Some(k) = d.argmax_k {
                rep.push(Record::new("detect", "estimated change-point", k as f64));
            }
            rep.push(Record::new("detect", "score", d.score));
            if let Some(c) = d.component {
                rep.push(Record::new("detect", "component", (c + 1) as f64));
            }
            for (i, u) in &det.contributors {
                rep.push(Record::new("detect", format!("U of stream {}", i + 1), *u));
            }
        }
        None => {
            rep.push(Record::new("detect", "rows read without a stop", det.rows as f64));
            rep.note("input exhausted before the threshold was reached");
        }
    }
    rep.stamp(&cfg.hash(), None);
    Ok((rep, det))
}

/// Regenerate reference tables by id.
pub fn reproduce_tables(ids: &[String], opts: &Options) -> Result<Vec<Table>> {
    let g = golden();
    for id in ids {
        if !reproduce::TABLE_IDS.contains(&id.as_str()) {
            bail!("unknown table id {id:?}; expected one of {}", reproduce::TABLE_IDS.join(", "));
        }
    }
    ids.iter().map(|id| reproduce::run(id, &g, opts)).collect()
}

pub fn tables_report(tables: &[Table], hash: &str, seed: u64) -> Report {
    let mut rep = Report::default();
    for t in tables {
        for c in &t.cells {
            let mut r = Record::from_cell("reproduce", c);
            r.label = format!("[{}] {}", t.id, c.label);
            rep.push(r);
        }
        for n in &t.notes {
            rep.note(format!("[{}] {n}", t.id));
        }
    }
    rep.stamp(hash, Some(seed));
    rep
}

/// Survival rows as CSV text.
pub fn survival_csv(t: &Table) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["m", "empirical", "fitted", "theory", "band"])?;
    for r in &t.survival {
        w.write_record([
            r.m.to_string(),
            r.empirical.to_string(),
            r.fitted.to_string(),
            r.theory.map(|v| v.to_string()).unwrap_or_default(),
            r.band.to_string(),
        ])?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}
