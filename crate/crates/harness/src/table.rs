//! Monte-Carlo summaries and their CSV / JSON renderings.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;

/// Decimal places used for every number in CSV output.
pub const DECIMALS: usize = 6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    /// Setting keys in column order, e.g. `truth`, `n`, `rho`, `candidate`.
    pub keys: Vec<(String, String)>,
    pub estimate: f64,
    /// Monte-Carlo standard error; absent for deterministic entries.
    pub stderr: Option<f64>,
    /// Replications that entered the estimate.
    pub reps: usize,
    /// Replications dropped because the fit was impossible.
    pub excluded: usize,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ResultTable {
    pub experiment: String,
    pub rows: Vec<ResultRow>,
    /// Human-readable remarks such as skipped datasets.
    #[serde(default)]
    pub notices: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    /// JSON for a `.json` extension, CSV otherwise.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("json") => Self::Json,
            _ => Self::Csv,
        }
    }
}

impl ResultTable {
    pub fn new(experiment: impl Into<String>) -> Self {
        Self {
            experiment: experiment.into(),
            ..Self::default()
        }
    }

    /// Key columns in order of first appearance.
    pub fn key_columns(&self) -> Vec<String> {
        let mut cols: Vec<String> = Vec::new();
        for row in &self.rows {
            for (k, _) in &row.keys {
                if !cols.contains(k) {
                    cols.push(k.clone());
                }
            }
        }
        cols
    }

    pub fn to_csv(&self) -> String {
        let cols = self.key_columns();
        let mut out = String::new();
        for c in &cols {
            out.push_str(c);
            out.push(',');
        }
        out.push_str("estimate,stderr,reps,excluded\n");
        for row in &self.rows {
            for c in &cols {
                if let Some((_, v)) = row.keys.iter().find(|(k, _)| k == c) {
                    out.push_str(&csv_field(v));
                }
                out.push(',');
            }
            let _ = write!(out, "{:.*},", DECIMALS, row.estimate);
            if let Some(se) = row.stderr {
                let _ = write!(out, "{:.*}", DECIMALS, se);
            }
            let _ = writeln!(out, ",{},{}", row.reps, row.excluded);
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn render(&self, format: Format) -> Result<String> {
        match format {
            Format::Csv => Ok(self.to_csv()),
            Format::Json => self.to_json(),
        }
    }

    /// Writes the table to `path`, picking the format from its extension.
    pub fn emit(&self, path: &Path) -> Result<()> {
        fs::write(path, self.render(Format::from_path(path))?)?;
        Ok(())
    }
}

fn csv_field(v: &str) -> String {
    if v.contains([',', '"', '\n']) {
        format!("\"{}\"", v.replace('"', "\"\""))
    } else {
        v.to_string()
    }
}

/// Rejection frequency with its binomial standard error.
pub fn proportion(hits: usize, total: usize) -> (f64, Option<f64>) {
    if total == 0 {
        return (f64::NAN, None);
    }
    let p = hits as f64 / total as f64;
    (p, Some((p * (1.0 - p) / total as f64).sqrt()))
}
