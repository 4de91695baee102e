//! CSV tables and run manifests.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::CliError;
use crate::runner::{RunOutput, Table};

pub const MANIFEST: &str = "manifest.json";
pub const SUMMARY: &str = "summary.csv";

pub fn write_table(dir: &Path, table: &Table) -> Result<PathBuf, CliError> {
    let path = dir.join(format!("{}.csv", table.name));
    let mut w = csv::Writer::from_path(&path)?;
    w.write_record(&table.headers)?;
    for row in &table.rows {
        w.write_record(row)?;
    }
    w.flush()?;
    Ok(path)
}

pub fn write_summary(dir: &Path, summary: &[(String, String)]) -> Result<PathBuf, CliError> {
    let path = dir.join(SUMMARY);
    let mut w = csv::Writer::from_path(&path)?;
    w.write_record(["key", "value"])?;
    for (k, v) in summary {
        w.write_record([k, v])?;
    }
    w.flush()?;
    Ok(path)
}

/// Writes every table and the summary; returns the file names.
pub fn write_outputs(dir: &Path, out: &RunOutput) -> Result<Vec<String>, CliError> {
    let mut files = Vec::new();
    for t in &out.tables {
        write_table(dir, t)?;
        files.push(format!("{}.csv", t.name));
    }
    write_summary(dir, &out.summary)?;
    files.push(SUMMARY.into());
    Ok(files)
}

#[derive(Clone, Debug, Serialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub experiment: Option<String>,
    pub config_path: Option<String>,
    /// The parsed configuration after command-line overrides.
    pub config: Option<serde_json::Value>,
    /// Raw text, kept when the configuration did not parse.
    pub config_text: Option<String>,
    pub seed: Option<u64>,
    pub threads: usize,
    pub wall_time_seconds: f64,
    pub status: String,
    pub exit_code: i32,
    pub convergence: BTreeMap<String, bool>,
    pub files: Vec<String>,
    pub error: Option<String>,
}

impl RunManifest {
    pub fn new() -> Self {
        Self {
            tool: "hypocauchy".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            experiment: None,
            config_path: None,
            config: None,
            config_text: None,
            seed: None,
            threads: rayon::current_num_threads(),
            wall_time_seconds: 0.0,
            status: "running".into(),
            exit_code: 0,
            convergence: BTreeMap::new(),
            files: Vec::new(),
            error: None,
        }
    }

    pub fn write(&self, dir: &Path) -> Result<PathBuf, CliError> {
        let path = dir.join(MANIFEST);
        let text = serde_json::to_string_pretty(self).map_err(|e| CliError::Io(e.to_string()))?;
        std::fs::write(&path, text + "\n")?;
        Ok(path)
    }
}

impl Default for RunManifest {
    fn default() -> Self {
        Self::new()
    }
}
