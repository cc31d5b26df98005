//! Result files: tidy CSVs (comma, LF, header row) and the run manifest.

use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{CliError, CliResult};

/// Writes `rows` with a header row taken from the field names.
pub fn write_csv<S: Serialize>(path: &Path, rows: impl IntoIterator<Item = S>) -> CliResult<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)
        .map_err(CliError::csv(path))?;
    for row in rows {
        w.serialize(row).map_err(CliError::csv(path))?;
    }
    w.flush().map_err(CliError::io(path))
}

/// Reads a CSV written by [`write_csv`]; a missing file is `MissingResult`.
pub fn read_csv<D: DeserializeOwned>(path: &Path) -> CliResult<Vec<D>> {
    if !path.is_file() {
        return Err(CliError::MissingResult(path.to_path_buf()));
    }
    let mut r = csv::Reader::from_path(path).map_err(CliError::csv(path))?;
    r.deserialize().collect::<Result<_, _>>().map_err(CliError::csv(path))
}

pub fn write_json<S: Serialize>(path: &Path, value: &S) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text).map_err(CliError::io(path))
}

/// Outcome of one check in a run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub name: String,
    /// Gating checks decide the exit status.
    pub gating: bool,
    pub pass: bool,
    pub detail: String,
}

impl CheckOutcome {
    pub fn gating(name: &str, pass: bool, detail: String) -> Self {
        Self {
            name: name.to_string(),
            gating: true,
            pass,
            detail,
        }
    }

    pub fn info(name: &str, detail: String) -> Self {
        Self {
            name: name.to_string(),
            gating: false,
            pass: true,
            detail,
        }
    }

    pub fn line(&self) -> String {
        let verdict = match (self.gating, self.pass) {
            (false, _) => "INFO",
            (true, true) => "PASS",
            (true, false) => "FAIL",
        };
        format!("{} {verdict} {}", self.name, self.detail)
    }
}

/// What an experiment produced.
#[derive(Debug, Default)]
pub struct RunOutput {
    pub checks: Vec<CheckOutcome>,
    /// File names relative to the run directory.
    pub artifacts: Vec<String>,
    pub results: serde_json::Map<String, serde_json::Value>,
}

impl RunOutput {
    pub fn csv<S: Serialize>(&mut self, dir: &Path, name: &str, rows: impl IntoIterator<Item = S>) -> CliResult<()> {
        write_csv(&dir.join(name), rows)?;
        self.artifacts.push(name.to_string());
        Ok(())
    }

    pub fn json<S: Serialize>(&mut self, dir: &Path, name: &str, value: &S) -> CliResult<()> {
        write_json(&dir.join(name), value)?;
        self.artifacts.push(name.to_string());
        Ok(())
    }

    pub fn result<S: Serialize>(&mut self, key: &str, value: &S) -> CliResult<()> {
        self.results.insert(key.to_string(), serde_json::to_value(value)?);
        Ok(())
    }

    pub fn failed(&self) -> bool {
        self.checks.iter().any(|c| c.gating && !c.pass)
    }

    /// Writes `summary.txt`, one line per check.
    pub fn write_summary(&mut self, dir: &Path) -> CliResult<()> {
        if self.checks.is_empty() {
            return Ok(());
        }
        let text: String = self.checks.iter().map(|c| c.line() + "\n").collect();
        let path = dir.join("summary.txt");
        std::fs::write(&path, text).map_err(CliError::io(path))?;
        self.artifacts.push("summary.txt".into());
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    ChecksFailed,
    Error,
}

#[derive(Debug, Serialize)]
pub struct Versions {
    pub junction_lab: &'static str,
    pub junction_core: &'static str,
}

#[derive(Debug, Serialize)]
pub struct Manifest {
    pub versions: Versions,
    pub kind: Option<String>,
    pub config_path: PathBuf,
    /// Echo of the parsed configuration (null when it failed to parse).
    pub config: serde_json::Value,
    pub seed: u64,
    pub jobs: Option<usize>,
    pub parallel: bool,
    pub started_unix_s: f64,
    pub wall_clock_s: f64,
    pub status: Status,
    pub error: Option<String>,
    pub checks: Vec<CheckOutcome>,
    pub artifacts: Vec<String>,
    pub results: serde_json::Map<String, serde_json::Value>,
}

impl Manifest {
    pub const FILE: &'static str = "manifest.json";

    pub fn write(&self, dir: &Path) -> CliResult<()> {
        write_json(&dir.join(Self::FILE), self)
    }
}
