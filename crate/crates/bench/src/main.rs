use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use semiriem_bench::check::run_checks;
use semiriem_bench::error::{BenchError, BenchResult, EXIT_NOT_CONVERGED, EXIT_OK, EXIT_USAGE};
use semiriem_bench::experiment::{ExperimentId, ExperimentSpec, FrameChoice, OptimizerId};
use semiriem_bench::plot::{emit_plot, PlotMetric, PlotStyle};
use semiriem_bench::suite::{run_suite, Manifest};
use semiriem_bench::trace::{write_atomic, TraceFile};
use semiriem_bench::run_experiment;

#[derive(Parser)]
#[command(name = "semiriem-bench", version, about = "Semi-Riemannian optimization benchmarks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment and write <out>.json and <out>.csv.
    Run(RunArgs),
    /// Run every row of a JSON manifest.
    Suite(SuiteArgs),
    /// Render trace files as a semilog SVG plot.
    Plot(PlotArgs),
    /// Run the diagnostics property suite.
    Check(CheckArgs),
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    experiment: Option<ExperimentId>,
    #[arg(long)]
    p: Option<usize>,
    #[arg(long)]
    q: Option<usize>,
    #[arg(long)]
    optimizer: Option<OptimizerId>,
    #[arg(long)]
    frames: Option<FrameChoice>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output stem; the trace JSON goes to stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON experiment spec; flags given on the command line override it.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct SuiteArgs {
    /// JSON manifest.
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides the manifest's out-dir.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

#[derive(Args)]
struct PlotArgs {
    /// Trace JSON files.
    #[arg(required = true)]
    traces: Vec<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    /// err-sq, f, stationarity or auto.
    #[arg(long, default_value = "auto")]
    metric: String,
    #[arg(long)]
    title: Option<String>,
}

#[derive(Args)]
struct CheckArgs {
    /// Random instances per check.
    #[arg(long, default_value_t = 20)]
    instances: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn read_spec(path: &Path) -> BenchResult<ExperimentSpec> {
    let text = std::fs::read_to_string(path).map_err(|e| BenchError::Io { path: path.into(), source: e })?;
    serde_json::from_str(&text).map_err(|source| BenchError::Json { path: path.into(), source })
}

fn run(args: RunArgs) -> BenchResult<i32> {
    let mut spec = match &args.config {
        Some(path) => read_spec(path)?,
        None => {
            let experiment = args.experiment.ok_or_else(|| BenchError::Usage("--experiment or --config is required".into()))?;
            let (p, q) = match (args.p, args.q) {
                (Some(p), Some(q)) => (p, q),
                _ => return Err(BenchError::Usage("--p and --q are required without --config".into())),
            };
            ExperimentSpec::new(experiment, p, q)
        }
    };
    if let Some(v) = args.experiment {
        spec.experiment = v;
    }
    if let Some(v) = args.p {
        spec.p = v;
    }
    if let Some(v) = args.q {
        spec.q = v;
    }
    if let Some(v) = args.optimizer {
        spec.optimizer = v;
    }
    if let Some(v) = args.frames {
        spec.frames = v;
    }
    if let Some(v) = args.seed {
        spec.seed = v;
    }
    if let Some(v) = args.out {
        spec.out = Some(v);
    }
    let trace = run_experiment(&spec)?;
    match &spec.out {
        Some(stem) => {
            let (json, csv) = trace.write(stem)?;
            eprintln!("wrote {} and {}", json.display(), csv.display());
        }
        None => print!("{}", trace.to_json()),
    }
    eprintln!(
        "{}: {} after {} iterations, stationarity {:.3e}{}",
        spec.default_stem(),
        trace.termination,
        trace.iterations,
        trace.final_stationarity,
        trace.final_err_sq().map(|e| format!(", err_sq {e:.3e}")).unwrap_or_default()
    );
    Ok(if trace.converged() { EXIT_OK } else { EXIT_NOT_CONVERGED })
}

fn suite(args: SuiteArgs) -> BenchResult<i32> {
    let manifest = Manifest::read(&args.config)?;
    let base = args.config.parent().unwrap_or(Path::new(".")).to_path_buf();
    let out_dir = match (args.out, &manifest.out_dir) {
        (Some(dir), _) => dir,
        (None, Some(dir)) if dir.is_absolute() => dir.clone(),
        (None, Some(dir)) => base.join(dir),
        (None, None) => base,
    };
    let summary = run_suite(&manifest, &out_dir, args.jobs)?;
    print!("{}", summary.table());
    Ok(summary.exit_code())
}

fn plot(args: PlotArgs) -> BenchResult<i32> {
    let metric = match args.metric.as_str() {
        "auto" => PlotMetric::Auto,
        "err-sq" => PlotMetric::ErrSq,
        "f" => PlotMetric::Value,
        "stationarity" => PlotMetric::Stationarity,
        other => return Err(BenchError::Usage(format!("unknown metric {other:?}"))),
    };
    let traces = args.traces.iter().map(|p| TraceFile::read(p)).collect::<BenchResult<Vec<_>>>()?;
    let svg = emit_plot(&traces, &PlotStyle { metric, title: args.title })?;
    write_atomic(&args.out, svg.as_bytes())?;
    Ok(EXIT_OK)
}

fn check(args: CheckArgs) -> BenchResult<i32> {
    let lines = run_checks(args.instances.max(1), args.seed);
    for line in &lines {
        println!("{}", line.render());
    }
    let failed = lines.iter().filter(|l| !l.passed()).count();
    println!("{} checks, {} failed", lines.len(), failed);
    Ok(if failed == 0 { EXIT_OK } else { EXIT_NOT_CONVERGED })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    let outcome = match cli.command {
        Command::Run(a) => run(a),
        Command::Suite(a) => suite(a),
        Command::Plot(a) => plot(a),
        Command::Check(a) => check(a),
    };
    match outcome {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
