use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::harness::tables::{fmt, Table};

/// Outcome of one acceptance criterion.
#[derive(Debug, Clone, PartialEq)]
pub struct CriterionResult {
    pub id: usize,
    pub name: &'static str,
    pub passed: bool,
    /// Measured quantities and thresholds.
    pub detail: String,
}

impl CriterionResult {
    pub fn line(&self) -> String {
        format!(
            "criterion {:>2} {} {}: {}",
            self.id,
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.detail
        )
    }
}

/// Everything an experiment reports. Rendering contains no timings or
/// other run-to-run variation, so equal configurations give equal bytes.
#[derive(Debug, Clone, Default)]
pub struct ExperimentReport {
    pub command: String,
    pub config_echo: String,
    pub norms: Option<Table>,
    pub summary: Vec<(String, f64)>,
    pub criteria: Vec<CriterionResult>,
}

impl ExperimentReport {
    pub fn new(command: &str, config_echo: String) -> Self {
        ExperimentReport {
            command: command.into(),
            config_echo,
            ..Default::default()
        }
    }

    pub fn scalar(&mut self, key: &str, value: f64) {
        self.summary.push((key.into(), value));
    }

    pub fn get(&self, key: &str) -> Option<f64> {
        self.summary.iter().find(|(k, _)| k == key).map(|&(_, v)| v)
    }

    pub fn passed(&self) -> bool {
        self.criteria.iter().all(|c| c.passed)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "[command]\n{}\n", self.command);
        let _ = writeln!(out, "[config]\n{}", self.config_echo);
        let _ = writeln!(out, "[summary]");
        for (k, v) in &self.summary {
            let _ = writeln!(out, "{k} = {}", fmt(*v));
        }
        if !self.criteria.is_empty() {
            let _ = writeln!(out, "\n[criteria]");
            for c in &self.criteria {
                let _ = writeln!(out, "{}", c.line());
            }
        }
        if let Some(t) = &self.norms {
            let _ = write!(out, "\n[norms]\n{}", t.to_csv_string());
        }
        out
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.render()).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })
    }
}
