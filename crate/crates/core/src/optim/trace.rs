//! Per-iteration records of an optimization run.

use crate::linalg::Vector;

/// State at iterate `k`. `step` is the step length that produced this
/// iterate (`None` at `k = 0`).
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub k: usize,
    pub f: f64,
    pub stationarity: f64,
    pub step: Option<f64>,
    pub beta: Option<f64>,
    pub rho: Option<f64>,
    pub radius: Option<f64>,
    pub err_sq: Option<f64>,
    /// Seconds since the start of the run.
    pub wall_time: f64,
}

/// An iterate was moved off a degenerate locus before iteration `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct PerturbationEvent {
    pub k: usize,
    pub displacement: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct IterationTrace {
    pub records: Vec<IterationRecord>,
    pub perturbations: Vec<PerturbationEvent>,
}

impl IterationTrace {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn last(&self) -> Option<&IterationRecord> {
        self.records.last()
    }

    pub fn values(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.f).collect()
    }

    pub fn err_sq(&self) -> Vec<Option<f64>> {
        self.records.iter().map(|r| r.err_sq).collect()
    }

    /// Whether `f` never increases between consecutive records.
    pub fn is_monotone(&self) -> bool {
        self.records.windows(2).all(|w| w[1].f <= w[0].f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    Converged,
    MaxIterations,
    /// `f` no longer resolves the remaining decrease: an accepted step left
    /// the iterate bitwise unchanged, or every backtracking trial failed.
    Stagnated,
}

#[derive(Debug, Clone)]
pub struct OptimResult {
    pub x: Vector,
    pub f: f64,
    pub stationarity: f64,
    pub iterations: usize,
    pub termination: Termination,
    pub trace: IterationTrace,
    /// Iterates `x_0, x_1, ...`, kept when requested.
    pub iterates: Vec<Vector>,
}

impl OptimResult {
    pub fn converged(&self) -> bool {
        self.termination == Termination::Converged
    }
}
