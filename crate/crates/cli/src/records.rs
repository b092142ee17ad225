//! Result records and their two output formats.

use std::io::Write;

use anyhow::Result;
use serde::Serialize;

use crate::config::Format;
use crate::study::Cell;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Record {
    pub command: String,
    pub label: String,
    pub config_hash: String,
    pub seed: Option<u64>,
    pub value: f64,
    pub std_error: Option<f64>,
    pub theory_value: Option<f64>,
    pub tolerance: Option<f64>,
    pub pass: Option<bool>,
}

impl Record {
    pub fn new(command: &str, label: impl Into<String>, value: f64) -> Self {
        Self {
            command: command.into(),
            label: label.into(),
            config_hash: String::new(),
            seed: None,
            value,
            std_error: None,
            theory_value: None,
            tolerance: None,
            pass: None,
        }
    }

    pub fn from_cell(command: &str, cell: &Cell) -> Self {
        Self {
            std_error: cell.std_error,
            theory_value: cell.reference,
            tolerance: cell.tolerance,
            pass: cell.pass,
            ..Self::new(command, cell.label.clone(), cell.value)
        }
    }

    pub fn se(mut self, se: f64) -> Self {
        self.std_error = Some(se);
        self
    }

    pub fn theory(mut self, v: f64) -> Self {
        self.theory_value = Some(v);
        self
    }
}

/// Collects records and writes them once, stamped with hash and seed.
#[derive(Debug, Default)]
pub struct Report {
    pub records: Vec<Record>,
    pub notes: Vec<String>,
}

impl Report {
    pub fn push(&mut self, r: Record) {
        self.records.push(r);
    }

    pub fn note(&mut self, s: impl Into<String>) {
        self.notes.push(s.into());
    }

    pub fn stamp(&mut self, hash: &str, seed: Option<u64>) {
        for r in &mut self.records {
            r.config_hash = hash.to_string();
            r.seed = seed;
        }
    }

    pub fn write(&self, format: Format, out: &mut dyn Write) -> Result<()> {
        match format {
            Format::Jsonl => {
                for r in &self.records {
                    serde_json::to_writer(&mut *out, r)?;
                    writeln!(out)?;
                }
            }
            Format::Table => {
                let w = self.records.iter().map(|r| r.label.chars().count()).max().unwrap_or(5).max(5);
                writeln!(out, "{:<w$}  {:>12}  {:>10}  {:>12}  {:>10}  check", "label", "value", "std err", "reference", "tolerance")?;
                for r in &self.records {
                    writeln!(
                        out,
                        "{:<w$}  {:>12}  {:>10}  {:>12}  {:>10}  {}",
                        r.label,
                        num(Some(r.value)),
                        num(r.std_error),
                        num(r.theory_value),
                        num(r.tolerance),
                        match r.pass {
                            Some(true) => "ok",
                            Some(false) => "MISMATCH",
                            None => "",
                        }
                    )?;
                }
                for n in &self.notes {
                    writeln!(out, "note: {n}")?;
                }
            }
        }
        Ok(())
    }
}

fn num(v: Option<f64>) -> String {
    match v {
        None => "-".into(),
        Some(x) if x.is_infinite() => format!("{x}"),
        Some(x) if x != 0.0 && (x.abs() >= 1e6 || x.abs() < 1e-3) => format!("{x:.4e}"),
        Some(x) => format!("{x:.4}"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jsonl_has_one_object_per_line() {
        let mut rep = Report::default();
        rep.push(Record::new("simulate", "arl", 12.5).se(0.5));
        rep.push(Record::new("simulate", "edd", 3.0).theory(2.9));
        rep.stamp("abc", Some(1));
        let mut buf = Vec::new();
        rep.write(Format::Jsonl, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines.len(), 2);
        let v: serde_json::Value = serde_json::from_str(lines[1]).unwrap();
        assert_eq!(v["config_hash"], "abc");
        assert_eq!(v["theory_value"], 2.9);
    }
}
