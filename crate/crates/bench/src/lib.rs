//! Benchmark harness: deterministic experiment instances, JSON/CSV traces,
//! SVG convergence plots, manifest-driven suites and the diagnostics check.

pub mod check;
pub mod error;
pub mod experiment;
pub mod plot;
pub mod suite;
pub mod trace;

pub use error::{BenchError, BenchResult};
pub use experiment::{run_experiment, ExperimentId, ExperimentSpec, FrameChoice, OptimizerId, Overrides, Problem};
pub use plot::{emit_plot, PlotMetric, PlotStyle};
pub use suite::{run_suite, Manifest, Summary};
pub use trace::TraceFile;
