//! Trace documents: JSON with a fixed key order and the companion CSV.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use semiriem::optim::{OptimResult, Reference, Termination};

use crate::error::{BenchError, BenchResult};
use crate::experiment::ExperimentSpec;

pub const TRACE_SCHEMA: &str = "semiriem-trace/1";
pub const CSV_HEADER: &str = "k,f,stationarity,step,err_sq";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub k: usize,
    pub f: f64,
    pub stationarity: f64,
    pub step: Option<f64>,
    pub beta: Option<f64>,
    pub rho: Option<f64>,
    pub radius: Option<f64>,
    pub err_sq: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Perturbation {
    pub k: usize,
    pub displacement: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceFile {
    pub schema: String,
    pub spec: ExperimentSpec,
    pub records: Vec<TraceRecord>,
    pub perturbations: Vec<Perturbation>,
    pub final_point: Vec<f64>,
    pub reference: Option<Vec<f64>>,
    /// `converged`, `max-iterations` or `stagnated`.
    pub termination: String,
    pub iterations: usize,
    pub final_stationarity: f64,
    /// Seconds; the only field allowed to differ between identical runs.
    pub wall_time: f64,
}

impl TraceFile {
    pub fn from_result(spec: &ExperimentSpec, r: &OptimResult, reference: Option<&Reference>, wall_time: f64) -> Self {
        let records = r
            .trace
            .records
            .iter()
            .map(|rec| TraceRecord {
                k: rec.k,
                f: rec.f,
                stationarity: rec.stationarity,
                step: rec.step,
                beta: rec.beta,
                rho: rec.rho,
                radius: rec.radius,
                err_sq: rec.err_sq,
            })
            .collect();
        let perturbations = r
            .trace
            .perturbations
            .iter()
            .map(|e| Perturbation { k: e.k, displacement: e.displacement })
            .collect();
        TraceFile {
            schema: TRACE_SCHEMA.to_string(),
            spec: spec.clone(),
            records,
            perturbations,
            final_point: r.x.iter().copied().collect(),
            reference: reference.map(|r| r.point.iter().copied().collect()),
            termination: match r.termination {
                Termination::Converged => "converged",
                Termination::MaxIterations => "max-iterations",
                Termination::Stagnated => "stagnated",
            }
            .to_string(),
            iterations: r.iterations,
            final_stationarity: r.stationarity,
            wall_time,
        }
    }

    pub fn converged(&self) -> bool {
        self.termination == "converged"
    }

    pub fn final_err_sq(&self) -> Option<f64> {
        self.records.last().and_then(|r| r.err_sq)
    }

    /// Schema tag, one record per iteration plus the start, consecutive `k`.
    pub fn validate(&self) -> Result<(), String> {
        if self.schema != TRACE_SCHEMA {
            return Err(format!("schema {:?} is not {TRACE_SCHEMA:?}", self.schema));
        }
        if self.records.len() != self.iterations + 1 {
            return Err(format!("{} records for {} iterations", self.records.len(), self.iterations));
        }
        if let Some((i, r)) = self.records.iter().enumerate().find(|(i, r)| r.k != *i) {
            return Err(format!("record {i} has k = {}", r.k));
        }
        if !matches!(self.termination.as_str(), "converged" | "max-iterations" | "stagnated") {
            return Err(format!("unknown termination {:?}", self.termination));
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("trace serializes") + "\n"
    }

    pub fn from_json(text: &str, path: &Path) -> BenchResult<Self> {
        serde_json::from_str(text).map_err(|source| BenchError::Json { path: path.to_path_buf(), source })
    }

    pub fn read(path: &Path) -> BenchResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| BenchError::io(path, e))?;
        Self::from_json(&text, path)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for r in &self.records {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                r.k,
                num(r.f),
                num(r.stationarity),
                r.step.map(num).unwrap_or_default(),
                r.err_sq.map(num).unwrap_or_default()
            );
        }
        out
    }

    /// Writes `<stem>.json` and `<stem>.csv` atomically.
    pub fn write(&self, stem: &Path) -> BenchResult<(PathBuf, PathBuf)> {
        let json = with_extension(stem, "json");
        let csv = with_extension(stem, "csv");
        write_atomic(&json, self.to_json().as_bytes())?;
        write_atomic(&csv, self.to_csv().as_bytes())?;
        Ok((json, csv))
    }
}

/// 17 significant digits.
fn num(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn with_extension(stem: &Path, ext: &str) -> PathBuf {
    let mut s = stem.as_os_str().to_owned();
    s.push(".");
    s.push(ext);
    PathBuf::from(s)
}

/// Temp file in the target directory, then rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> BenchResult<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => PathBuf::from("."),
    };
    std::fs::create_dir_all(&dir).map_err(|e| BenchError::io(&dir, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(&dir).map_err(|e| BenchError::io(&dir, e))?;
    tmp.write_all(bytes).map_err(|e| BenchError::io(path, e))?;
    tmp.persist(path).map_err(|e| BenchError::io(path, e.error))?;
    Ok(())
}
