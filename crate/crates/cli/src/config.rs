//! Run configuration shared by every command, read from TOML and/or flags.

use std::path::PathBuf;

use anyhow::{anyhow, bail, Context, Result};
use clap::ValueEnum;
use mixdetect::detector::{DetectorConfig, Rule};
use mixdetect::montecarlo::DetectorSpec;
use mixdetect::profile::{source_scenario, ProfileModel, SensorGrid};
use mixdetect::scenario::Scenario;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum RuleName {
    T1,
    T2,
    T3,
    T4,
    Max,
    Mei,
    Tv,
    Profile,
    Parallel,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Table,
    Jsonl,
}

/// One member of a parallel rule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentConfig {
    pub rule: RuleName,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    /// Change-point; omitted means no change.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kappa: Option<u64>,
    /// Number of affected streams, taken from the front.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub affected: Option<usize>,
    /// Fraction of affected streams, rounded to a count.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fraction: Option<f64>,
    /// Explicit affected stream indices (0-based).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub streams: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    /// Point sources on the sensor grid, as `[r, x, y]`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub sources: Vec<[f64; 3]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub side: usize,
    #[serde(default = "one")]
    pub spacing: f64,
    #[serde(default = "one")]
    pub beta: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lattice_spacing: Option<f64>,
    /// Decay parameters searched by the matched filter.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub betas: Option<Vec<f64>>,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    #[serde(default)]
    pub format: Format,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rule: Option<RuleName>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    #[serde(rename = "N", skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m0: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m1: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target_arl: Option<f64>,
    /// Tail probability by `horizon` for empirical calibration.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub horizon: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Hard cap on full simulation runs.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cap: Option<u64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub components: Vec<ComponentConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scenario: Option<ScenarioConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputConfig>,
}

pub const DEFAULT_TRIALS: usize = 200;
pub const DEFAULT_SEED: u64 = 20_100_101;

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).context("invalid configuration")
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }

    /// Fields set in `over` replace those in `self`.
    pub fn merged(mut self, over: RunConfig) -> Self {
        macro_rules! take {
            ($($f:ident),*) => { $( if over.$f.is_some() { self.$f = over.$f; } )* };
        }
        take!(rule, p0, delta, b, n, m0, m1, target_arl, alpha, horizon, trials, seed, cap, scenario, grid, output);
        if !over.components.is_empty() {
            self.components = over.components;
        }
        self
    }

    /// SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("configuration serializes");
        format!("{:x}", Sha256::digest(json.as_bytes()))
    }

    pub fn m0(&self) -> usize {
        self.m0.unwrap_or(1)
    }

    pub fn m1(&self) -> usize {
        self.m1.unwrap_or(200)
    }

    pub fn trials(&self) -> usize {
        self.trials.unwrap_or(DEFAULT_TRIALS)
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(DEFAULT_SEED)
    }

    pub fn format(&self) -> Format {
        self.output.as_ref().map(|o| o.format).unwrap_or_default()
    }

    pub fn rule_name(&self) -> Result<RuleName> {
        match self.rule {
            Some(r) => Ok(r),
            None if !self.components.is_empty() => Ok(RuleName::Parallel),
            None => bail!("no rule given"),
        }
    }

    pub fn sensor_grid(&self) -> Result<Option<SensorGrid>> {
        self.grid
            .as_ref()
            .map(|g| SensorGrid::centered_square(g.side, g.spacing).map_err(Into::into))
            .transpose()
    }

    pub fn n_streams(&self) -> Result<usize> {
        let from_grid = self.sensor_grid()?.map(|g| g.len());
        match (self.n, from_grid) {
            (Some(n), Some(g)) if n != g => bail!("N = {n} disagrees with the grid's {g} sensors"),
            (Some(n), _) => Ok(n),
            (None, Some(g)) => Ok(g),
            (None, None) => bail!("number of streams N not given"),
        }
    }

    pub fn threshold(&self) -> Result<f64> {
        self.b.ok_or_else(|| anyhow!("threshold b not given"))
    }

    /// Build a single rule by name with the given parameters.
    pub fn make_rule(&self, name: RuleName, p0: Option<f64>, delta: Option<f64>) -> Result<Rule> {
        let need_p0 = || p0.ok_or_else(|| anyhow!("rule {name:?} needs p0"));
        let need_delta = || delta.ok_or_else(|| anyhow!("rule {name:?} needs delta"));
        Ok(match name {
            RuleName::T1 => Rule::T1 { p0: need_p0()?, delta: need_delta()? },
            RuleName::T2 => Rule::T2 { p0: need_p0()? },
            RuleName::T3 => Rule::T3 { p0: need_p0()?, delta: need_delta()? },
            RuleName::T4 => Rule::T4 { p0: need_p0()? },
            RuleName::Max => Rule::Max,
            RuleName::Mei => Rule::Mei { delta: need_delta()? },
            RuleName::Tv => Rule::Tv { delta: need_delta()? },
            RuleName::Profile => {
                let g = self.grid.as_ref().ok_or_else(|| anyhow!("the profile rule needs a [grid] section"))?;
                let grid = SensorGrid::centered_square(g.side, g.spacing)?;
                let mut model = ProfileModel::new(&grid, g.beta)?;
                if let Some(h) = g.lattice_spacing {
                    model.lattice_spacing = h;
                }
                if let Some(b) = &g.betas {
                    model.beta_candidates = b.clone();
                }
                Rule::Profile(Box::new(model.matched_filter(&grid)?))
            }
            RuleName::Parallel => bail!("parallel rules are given by their components"),
        })
    }

    /// The configured single rule.
    pub fn single_rule(&self) -> Result<Rule> {
        self.make_rule(self.rule_name()?, self.p0, self.delta)
    }

    /// Detector with thresholds from the configuration; a missing threshold
    /// is replaced by `fallback`.
    pub fn detector_spec_or(&self, fallback: Option<f64>) -> Result<DetectorSpec> {
        let (m0, m1) = (self.m0(), self.m1());
        let n = self.n_streams()?;
        let spec = match self.rule_name()? {
            RuleName::Parallel => {
                if self.components.is_empty() {
                    bail!("a parallel rule needs at least one component");
                }
                let components = self
                    .components
                    .iter()
                    .map(|c| {
                        let b = c.b.or(fallback).ok_or_else(|| anyhow!("component {:?} has no threshold", c.rule))?;
                        Ok((self.make_rule(c.rule, c.p0, c.delta)?, b))
                    })
                    .collect::<Result<Vec<_>>>()?;
                DetectorSpec::Parallel { components, m0, m1 }
            }
            _ => {
                let b = self.b.or(fallback).ok_or_else(|| anyhow!("threshold b not given"))?;
                DetectorSpec::Single(DetectorConfig::new(self.single_rule()?, b, m0, m1))
            }
        };
        // Validate against the stream count before any work is dispatched.
        spec.with_thresholds(&spec.thresholds())?;
        match &spec {
            DetectorSpec::Single(c) => c.validate(n)?,
            DetectorSpec::Parallel { components, .. } => {
                for (r, _) in components {
                    DetectorConfig::new(r.clone(), 0.0, m0, m1).validate(n)?;
                }
            }
        }
        Ok(spec)
    }

    pub fn detector_spec(&self) -> Result<DetectorSpec> {
        self.detector_spec_or(None)
    }

    /// Configured scenario, or the null scenario when none is given.
    pub fn scenario(&self) -> Result<Scenario> {
        let n = self.n_streams()?;
        let Some(s) = &self.scenario else {
            return Ok(Scenario::null(n));
        };
        if !s.sources.is_empty() {
            let grid = self
                .sensor_grid()?
                .ok_or_else(|| anyhow!("point sources need a [grid] section"))?;
            let beta = self.grid.as_ref().map(|g| g.beta).unwrap_or(1.0);
            let src: Vec<(f64, [f64; 2])> = s.sources.iter().map(|v| (v[0], [v[1], v[2]])).collect();
            let mut sc = source_scenario(&src, &grid, beta)?;
            sc.change_point = Some(s.kappa.unwrap_or(0));
            sc.validate()?;
            return Ok(sc);
        }
        let mu = s.mu.ok_or_else(|| anyhow!("scenario needs mu"))?;
        let streams: Vec<usize> = match (&s.streams, s.affected, s.fraction) {
            (Some(v), None, None) => v.clone(),
            (None, Some(c), None) => (0..c).collect(),
            (None, None, Some(p)) => {
                if !(0.0..=1.0).contains(&p) {
                    bail!("scenario fraction must lie in [0, 1], got {p}");
                }
                (0..(p * n as f64).round() as usize).collect()
            }
            (None, None, None) => bail!("scenario needs one of affected, fraction or streams"),
            _ => bail!("give only one of affected, fraction or streams"),
        };
        let means = vec![mu; streams.len()];
        Ok(Scenario::new(n, Some(s.kappa.unwrap_or(0)), streams, means)?)
    }

    /// Checks shared by all commands.
    pub fn validate(&self) -> Result<()> {
        if let Some(t) = self.target_arl {
            if !(t > 1.0) {
                bail!("target_arl must exceed 1, got {t}");
            }
        }
        if let Some(a) = self.alpha {
            if !(a > 0.0 && a < 1.0) {
                bail!("alpha must lie in (0, 1), got {a}");
            }
        }
        if self.trials == Some(0) {
            bail!("trials must be positive");
        }
        if self.horizon == Some(0) {
            bail!("horizon must be positive");
        }
        if self.cap == Some(0) {
            bail!("cap must be positive");
        }
        if let Some(b) = self.b {
            if b.is_nan() {
                bail!("threshold b must be a number");
            }
        }
        if self.m0() == 0 || self.m0() >= self.m1() {
            bail!("need 1 <= m0 < m1, got m0 = {}, m1 = {}", self.m0(), self.m1());
        }
        if self.rule.is_some() || !self.components.is_empty() {
            self.detector_spec_or(Some(0.0))?;
        }
        if self.scenario.is_some() {
            self.scenario()?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"
rule = "t2"
p0 = 0.1
b = 19.5
N = 100
m1 = 200
trials = 50
seed = 7

[scenario]
kappa = 0
fraction = 0.03
mu = 1.0

[output]
format = "jsonl"
"#;

    #[test]
    fn toml_round_trip_is_identity() {
        let a = RunConfig::from_toml(SAMPLE).unwrap();
        let text = a.to_toml().unwrap();
        let b = RunConfig::from_toml(&text).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.hash(), b.hash());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(RunConfig::from_toml("rule = \"t2\"\nthreshold = 3.0\n").is_err());
        assert!(RunConfig::from_toml("[scenario]\nmu = 1.0\nwhen = 3\n").is_err());
    }

    #[test]
    fn flags_override_file_values() {
        let file = RunConfig::from_toml(SAMPLE).unwrap();
        let flags = RunConfig {
            b: Some(21.0),
            ..Default::default()
        };
        let m = file.merged(flags);
        assert_eq!(m.b, Some(21.0));
        assert_eq!(m.p0, Some(0.1));
    }

    #[test]
    fn validation_catches_bad_values() {
        let mut c = RunConfig::from_toml(SAMPLE).unwrap();
        c.validate().unwrap();
        c.target_arl = Some(1.0);
        assert!(c.validate().is_err());
        c.target_arl = None;
        c.p0 = Some(1.5);
        assert!(c.validate().is_err());
        c.p0 = Some(0.1);
        c.m0 = Some(200);
        assert!(c.validate().is_err());
    }

    #[test]
    fn scenario_from_fraction() {
        let c = RunConfig::from_toml(SAMPLE).unwrap();
        let s = c.scenario().unwrap();
        assert_eq!(s.affected, vec![0, 1, 2]);
        assert_eq!(s.change_point, Some(0));
    }

    #[test]
    fn hash_changes_with_content() {
        let a = RunConfig::from_toml(SAMPLE).unwrap();
        let mut b = a.clone();
        b.seed = Some(8);
        assert_ne!(a.hash(), b.hash());
    }
}
