//! Reference values shipped with the binary.

use serde::Deserialize;

const GOLDEN: &str = include_str!("../data/golden.toml");

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Golden {
    pub reference_trials: usize,
    pub table1: ArlTable,
    pub table2: ArlTable,
    pub table3: DelayTable,
    pub table4: ThresholdTable,
    pub table5: CompareTable,
    pub table6: ParallelTable,
    pub table7: ProfileTable,
    pub fig1: SurvivalSpec,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArlTable {
    pub n: usize,
    pub m0: usize,
    pub m1: usize,
    pub theory_rel_tol: f64,
    pub mc_se_factor: f64,
    pub rows: Vec<ArlRow>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArlRow {
    pub p0: f64,
    pub b: f64,
    pub theory: f64,
    pub mc: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Threshold {
    pub p0: f64,
    pub b: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DelayTable {
    /// Steps by which the printed delays exceed `E[T]` with the first
    /// post-change observation at time 1.
    pub printed_delay_offset: f64,
    pub n: usize,
    pub mu: f64,
    pub m0: usize,
    pub m1: usize,
    pub theory_abs_tol: f64,
    pub mc_se_factor: f64,
    pub thresholds_mixture: Vec<Threshold>,
    pub thresholds_hard: Vec<Threshold>,
    pub rows: Vec<DelayRow>,
}

impl DelayTable {
    pub fn mixture_b(&self, p0: f64) -> Option<f64> {
        self.thresholds_mixture.iter().find(|t| t.p0 == p0).map(|t| t.b)
    }

    pub fn hard_b(&self, p0: f64) -> Option<f64> {
        self.thresholds_hard.iter().find(|t| t.p0 == p0).map(|t| t.b)
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DelayRow {
    pub p: f64,
    pub p0: f64,
    pub mixture_theory: f64,
    pub mixture_mc: f64,
    pub hard_theory: f64,
    pub hard_mc: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThresholdTable {
    pub n: usize,
    pub m0: usize,
    pub m1: usize,
    pub mc_se_factor: f64,
    pub rows: Vec<RuleRow>,
}

impl ThresholdTable {
    pub fn get(&self, id: &str) -> Option<&RuleRow> {
        self.rows.iter().find(|r| r.id == id)
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RuleRow {
    pub id: String,
    pub rule: String,
    pub p0: Option<f64>,
    pub delta: Option<f64>,
    pub b: f64,
    pub mc: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareTable {
    /// Steps by which the printed delays exceed `E[T]` with the first
    /// post-change observation at time 1.
    pub printed_delay_offset: f64,
    pub n: usize,
    pub mus: Vec<f64>,
    pub mc_se_factor: f64,
    pub rows: Vec<CompareRow>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareRow {
    pub p: f64,
    pub method: String,
    pub mc: Vec<f64>,
    pub theory: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TailThreshold {
    pub p0: f64,
    pub b: f64,
    pub alpha: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParallelTable {
    /// Steps by which the printed delays exceed `E[T]` with the first
    /// post-change observation at time 1.
    pub printed_delay_offset: f64,
    pub n: usize,
    pub m0: usize,
    pub m1: usize,
    pub horizon: u64,
    pub single: TailThreshold,
    pub parallel: Vec<TailThreshold>,
    pub threshold_rel_tol: f64,
    pub mc_se_factor: f64,
    pub rows: Vec<ParallelRow>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParallelRow {
    pub p: f64,
    pub mu: f64,
    pub single: f64,
    pub parallel: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TheoryTail {
    pub b: f64,
    pub value: f64,
    pub rel_tol: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileTable {
    /// Steps by which the printed delays exceed `E[T]` with the first
    /// post-change observation at time 1.
    pub printed_delay_offset: f64,
    pub side: usize,
    pub spacing: f64,
    pub beta: f64,
    pub m0: usize,
    pub m1: usize,
    pub horizon: u64,
    pub theory_tail: TheoryTail,
    pub calibrated_b: f64,
    pub calibrated_range: [f64; 2],
    pub beta_range_b: f64,
    pub unstructured_p0: f64,
    pub unstructured_b: f64,
    pub mc_se_factor: f64,
    pub rows: Vec<ProfileRow>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileRow {
    pub r: f64,
    pub profile: f64,
    pub unstructured: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurvivalSpec {
    pub n: usize,
    pub m0: usize,
    pub m1: usize,
    pub p0: f64,
    pub b: f64,
    pub trials: usize,
    pub ks_level: f64,
    pub grid_points: usize,
}

pub fn golden() -> Golden {
    toml::from_str(GOLDEN).expect("embedded reference data parses")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn embedded_data_is_complete() {
        let g = golden();
        assert_eq!(g.table1.rows.len(), 6);
        assert_eq!(g.table2.rows.len(), 3);
        assert_eq!(g.table3.rows.len(), 6);
        assert_eq!(g.table4.rows.len(), 6);
        assert_eq!(g.table5.rows.len(), 42);
        assert_eq!(g.table6.rows.len(), 6);
        assert_eq!(g.table7.rows.len(), 2);
        for row in &g.table5.rows {
            assert!(g.table4.get(&row.method).is_some(), "{}", row.method);
            assert_eq!(row.mc.len(), g.table5.mus.len());
        }
        for row in &g.table3.rows {
            assert!(g.table3.mixture_b(row.p0).is_some());
            assert!(g.table3.hard_b(row.p0).is_some());
        }
    }
}
