//! Check records and the run report.

use std::io::Write;
use std::path::Path;

use serde::Serialize;

use super::CliError;

/// How a residual is compared with its tolerance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Criterion {
    /// `|residual| < tolerance`
    Below,
    /// `residual > tolerance`
    Above,
    /// `lower <= residual <= tolerance`
    Within { lower: f64 },
}

impl Criterion {
    pub fn holds(self, residual: f64, tolerance: f64) -> bool {
        match self {
            Criterion::Below => residual.abs() < tolerance,
            Criterion::Above => residual > tolerance,
            Criterion::Within { lower } => lower <= residual && residual <= tolerance,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Record {
    pub name: String,
    /// The relation the check verifies.
    pub relation: String,
    pub residual: f64,
    pub tolerance: f64,
    pub criterion: Criterion,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Record {
    pub fn new(name: impl Into<String>, relation: &str, residual: f64, tolerance: f64, criterion: Criterion) -> Self {
        Self {
            name: name.into(),
            relation: relation.to_string(),
            residual,
            tolerance,
            criterion,
            passed: criterion.holds(residual, tolerance),
            note: None,
        }
    }

    pub fn below(name: impl Into<String>, relation: &str, residual: f64, tolerance: f64) -> Self {
        Self::new(name, relation, residual, tolerance, Criterion::Below)
    }

    pub fn above(name: impl Into<String>, relation: &str, residual: f64, threshold: f64) -> Self {
        Self::new(name, relation, residual, threshold, Criterion::Above)
    }

    /// A check that could not be evaluated.
    pub fn failed(name: impl Into<String>, relation: &str, tolerance: f64, note: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            relation: relation.to_string(),
            residual: f64::NAN,
            tolerance,
            criterion: Criterion::Below,
            passed: false,
            note: Some(note.into()),
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub command: String,
    pub seed: u64,
    pub alpha: f64,
    pub passed: bool,
    pub summary: Summary,
    pub records: Vec<Record>,
    pub outputs: Vec<String>,
}

impl Report {
    pub fn new(command: &str, seed: u64, alpha: f64, mut records: Vec<Record>, outputs: Vec<String>) -> Self {
        records.sort_by(|a, b| a.name.cmp(&b.name));
        let passed_count = records.iter().filter(|r| r.passed).count();
        Self {
            command: command.to_string(),
            seed,
            alpha,
            passed: passed_count == records.len(),
            summary: Summary {
                total: records.len(),
                passed: passed_count,
                failed: records.len() - passed_count,
            },
            records,
            outputs,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn write_json(&self, path: &Path) -> Result<(), CliError> {
        let mut file = std::fs::File::create(path).map_err(|e| CliError::io(path, e))?;
        writeln!(file, "{}", self.to_json()).map_err(|e| CliError::io(path, e))
    }

    /// One line per record plus a summary line.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            let status = if r.passed { "PASS" } else { "FAIL" };
            out.push_str(&format!(
                "{status} {} [{}] residual={:.3e} tol={:.1e}\n",
                r.name, r.relation, r.residual, r.tolerance
            ));
        }
        out.push_str(&format!(
            "{}: {}/{} checks passed (seed {})\n",
            self.command, self.summary.passed, self.summary.total, self.seed
        ));
        out
    }
}

/// Formats a value with 17 significant digits.
pub fn full_precision(v: f64) -> String {
    format!("{v:.16e}")
}
