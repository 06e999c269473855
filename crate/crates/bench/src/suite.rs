//! Manifest-driven batches of experiments.

use std::collections::{BTreeMap, HashSet};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::error::{BenchError, BenchResult, EXIT_INTERNAL, EXIT_NOT_CONVERGED, EXIT_OK};
use crate::experiment::{run_experiment, ExperimentSpec};
use crate::plot::{emit_plot, PlotStyle};
use crate::trace::{with_extension, write_atomic, TraceFile};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct Manifest {
    /// Directory for traces, plots and the summary; relative to the manifest.
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
    #[serde(default = "yes")]
    pub plots: bool,
    #[serde(default)]
    pub rows: Vec<ExperimentSpec>,
}

fn yes() -> bool {
    true
}

impl Manifest {
    pub fn read(path: &Path) -> BenchResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| BenchError::io(path, e))?;
        serde_json::from_str(&text).map_err(|source| BenchError::Json { path: path.to_path_buf(), source })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub stem: String,
    pub experiment: String,
    pub p: usize,
    pub q: usize,
    pub optimizer: String,
    pub frames: String,
    pub seed: u64,
    pub converged: bool,
    pub iterations: Option<usize>,
    pub final_stationarity: Option<f64>,
    pub final_err_sq: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub rows: Vec<SummaryRow>,
    pub plots: Vec<PathBuf>,
}

impl Summary {
    pub fn exit_code(&self) -> i32 {
        if self.rows.iter().any(|r| r.error.is_some()) {
            EXIT_INTERNAL
        } else if self.rows.iter().any(|r| !r.converged) {
            EXIT_NOT_CONVERGED
        } else {
            EXIT_OK
        }
    }

    pub fn table(&self) -> String {
        let mut s = format!(
            "{:<56} {:>9} {:>7} {:>12} {:>12}  {}\n",
            "row", "converged", "iters", "stationarity", "err_sq", "error"
        );
        let opt = |v: Option<f64>| v.map(|v| format!("{v:.3e}")).unwrap_or_else(|| "-".into());
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{:<56} {:>9} {:>7} {:>12} {:>12}  {}",
                r.stem,
                if r.converged { "yes" } else { "no" },
                r.iterations.map(|k| k.to_string()).unwrap_or_else(|| "-".into()),
                opt(r.final_stationarity),
                opt(r.final_err_sq),
                r.error.as_deref().unwrap_or("")
            );
        }
        s
    }
}

/// The stem each row writes to, rejecting collisions.
pub fn output_stems(rows: &[ExperimentSpec], out_dir: &Path) -> BenchResult<Vec<PathBuf>> {
    let mut seen = HashSet::new();
    let mut stems = Vec::with_capacity(rows.len());
    for row in rows {
        let stem = match &row.out {
            Some(p) if p.is_absolute() => p.clone(),
            Some(p) => out_dir.join(p),
            None => out_dir.join(row.default_stem()),
        };
        if !seen.insert(stem.clone()) {
            return Err(BenchError::DuplicateOutput(stem));
        }
        stems.push(stem);
    }
    Ok(stems)
}

fn summarize(spec: &ExperimentSpec, stem: &Path, outcome: &BenchResult<TraceFile>) -> SummaryRow {
    let name = stem.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let (converged, iterations, stat, err, error) = match outcome {
        Ok(t) => (t.converged(), Some(t.iterations), Some(t.final_stationarity), t.final_err_sq(), None),
        Err(e) => (false, None, None, None, Some(e.to_string())),
    };
    SummaryRow {
        stem: name,
        experiment: spec.experiment.to_string(),
        p: spec.p,
        q: spec.q,
        optimizer: spec.optimizer.to_string(),
        frames: spec.frames.to_string(),
        seed: spec.seed,
        converged,
        iterations,
        final_stationarity: stat,
        final_err_sq: err,
        error,
    }
}

/// Runs every row on `jobs` workers, writes traces, plots and the summary.
pub fn run_suite(manifest: &Manifest, out_dir: &Path, jobs: usize) -> BenchResult<Summary> {
    for row in &manifest.rows {
        row.validate()?;
    }
    let stems = output_stems(&manifest.rows, out_dir)?;
    let jobs = jobs.max(1).min(manifest.rows.len().max(1));
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<BenchResult<TraceFile>>>> = Mutex::new((0..manifest.rows.len()).map(|_| None).collect());
    std::thread::scope(|scope| {
        for _ in 0..jobs {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                if i >= manifest.rows.len() {
                    break;
                }
                let outcome = run_experiment(&manifest.rows[i]).and_then(|t| t.write(&stems[i]).map(|_| t));
                slots.lock().expect("no worker panics while holding the lock")[i] = Some(outcome);
            });
        }
    });
    let outcomes: Vec<BenchResult<TraceFile>> =
        slots.into_inner().expect("workers joined").into_iter().map(|o| o.expect("every row ran")).collect();

    let mut summary = Summary::default();
    for ((spec, stem), outcome) in manifest.rows.iter().zip(&stems).zip(&outcomes) {
        summary.rows.push(summarize(spec, stem, outcome));
    }
    if manifest.plots {
        let mut groups: BTreeMap<String, Vec<TraceFile>> = BTreeMap::new();
        for t in outcomes.iter().flatten() {
            groups.entry(t.spec.experiment.to_string()).or_default().push(t.clone());
        }
        for (name, traces) in groups {
            let path = out_dir.join(format!("{name}.svg"));
            write_atomic(&path, emit_plot(&traces, &PlotStyle::default())?.as_bytes())?;
            summary.plots.push(path);
        }
    }
    let stem = out_dir.join("summary");
    let json = serde_json::to_string_pretty(&summary).expect("summary serializes") + "\n";
    write_atomic(&with_extension(&stem, "json"), json.as_bytes())?;
    write_atomic(&with_extension(&stem, "txt"), summary.table().as_bytes())?;
    Ok(summary)
}
