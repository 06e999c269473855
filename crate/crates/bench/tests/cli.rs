use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use semiriem_bench::trace::{TraceFile, CSV_HEADER};

fn bench(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_semiriem-bench")).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf-8 stdout")
}

fn manifest_path() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("manifests/reference-suite.json")
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn without_wall_time(mut t: TraceFile) -> TraceFile {
    t.wall_time = 0.0;
    t
}

#[test]
fn run_converges_with_exit_zero_and_writes_both_files() {
    let dir = tempfile::tempdir().unwrap();
    let stem = dir.path().join("mink");
    let out = bench(&["run", "--experiment", "minkowski-quadratic", "--p", "1", "--q", "1", "--out", stem.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let trace = TraceFile::read(&dir.path().join("mink.json")).unwrap();
    assert!(trace.converged());
    assert!(trace.final_point.iter().all(|x| x.abs() < 1e-8));
    let csv = std::fs::read_to_string(dir.path().join("mink.csv")).unwrap();
    let mut lines = csv.split('\n');
    assert_eq!(lines.next(), Some(CSV_HEADER));
    assert!(!csv.contains('\r'));
    assert!(csv.ends_with('\n'));
    assert_eq!(csv.lines().count(), trace.records.len() + 1);

    // 17 significant digits: one leading digit and sixteen after the point
    let row = csv.lines().nth(1).unwrap();
    let f = row.split(',').nth(1).unwrap();
    let mantissa = f.split('e').next().unwrap().trim_start_matches('-');
    assert_eq!(mantissa.len(), 18, "{f}");
}

#[test]
fn run_without_out_prints_the_trace_json() {
    let out = bench(&["run", "--experiment", "minkowski-quadratic", "--p", "1", "--q", "1"]);
    assert_eq!(code(&out), 0);
    let trace = TraceFile::from_json(&stdout(&out), Path::new("<stdout>")).unwrap();
    assert!(trace.validate().is_ok());
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(code(&bench(&["run", "--experiment", "sphere-rayleigh", "--p", "1", "--q", "0"])), 2);
    assert_eq!(code(&bench(&["run", "--experiment", "no-such-experiment", "--p", "1", "--q", "1"])), 2);
    assert_eq!(code(&bench(&["run", "--p", "1", "--q", "1"])), 2);
    assert_eq!(code(&bench(&["frobnicate"])), 2);
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.json", r#"{"experiment": "minkowski-quadratic", "p": 1, "q": 1, "colour": 3}"#);
    assert_ne!(code(&bench(&["run", "--config", bad.to_str().unwrap()])), 0);
}

#[test]
fn iteration_budget_exhaustion_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "short.json",
        r#"{"experiment": "sphere-rayleigh", "p": 2, "q": 8, "optimizer": "sd", "config": {"max-iters": 2}}"#,
    );
    let out = bench(&["run", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&out), 3);
    let trace = TraceFile::from_json(&stdout(&out), Path::new("<stdout>")).unwrap();
    assert_eq!(trace.termination, "max-iterations");
    assert_eq!(trace.records.len(), 3);
}

#[test]
fn command_line_flags_override_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "spec.json", r#"{"experiment": "sphere-rayleigh", "p": 2, "q": 8, "optimizer": "sd"}"#);
    let out = bench(&["run", "--config", cfg.to_str().unwrap(), "--p", "5", "--q", "5", "--optimizer", "cg"]);
    assert_eq!(code(&out), 0);
    let trace = TraceFile::from_json(&stdout(&out), Path::new("<stdout>")).unwrap();
    assert_eq!((trace.spec.p, trace.spec.q, trace.spec.optimizer.to_string().as_str()), (5, 5, "cg"));
}

#[test]
fn identical_specs_give_identical_traces_apart_from_wall_time() {
    for experiment in ["minkowski-quadratic", "sphere-rayleigh", "pseudosphere-distance"] {
        let args = ["run", "--experiment", experiment, "--p", "2", "--q", "3", "--frames", "per-point", "--seed", "7"];
        let a = TraceFile::from_json(&stdout(&bench(&args)), Path::new("<stdout>")).unwrap();
        let b = TraceFile::from_json(&stdout(&bench(&args)), Path::new("<stdout>")).unwrap();
        let (a, b) = (without_wall_time(a), without_wall_time(b));
        assert_eq!(a.to_json(), b.to_json(), "{experiment}");
    }
}

#[test]
fn objective_column_is_non_increasing_for_sd_and_cg() {
    for optimizer in ["sd", "cg"] {
        for (experiment, p, q) in [("sphere-rayleigh", "4", "6"), ("pseudosphere-distance", "3", "12")] {
            let out = bench(&["run", "--experiment", experiment, "--p", p, "--q", q, "--optimizer", optimizer]);
            let trace = TraceFile::from_json(&stdout(&out), Path::new("<stdout>")).unwrap();
            assert!(trace.records.windows(2).all(|w| w[1].f <= w[0].f), "{experiment} {optimizer}");
            assert!(trace.records.iter().all(|r| r.err_sq.is_some()));
        }
    }
}

#[test]
fn plot_of_eleven_signatures_has_eleven_curves_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    // 1e-8 sits at the f-resolution floor of this problem, where runs may stagnate
    let cfg = write(dir.path(), "rayleigh.json", r#"{"experiment": "sphere-rayleigh", "p": 0, "q": 10, "config": {"grad-tol": 1e-7}}"#);
    let mut traces = Vec::new();
    for p in 0..=10 {
        let stem = dir.path().join(format!("r{p}"));
        let q = (10 - p).to_string();
        let p = p.to_string();
        let out = bench(&["run", "--config", cfg.to_str().unwrap(), "--p", &p, "--q", &q, "--out", stem.to_str().unwrap()]);
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
        traces.push(stem.with_extension("json").to_str().unwrap().to_string());
    }
    let render = |name: &str| {
        let path = dir.path().join(name);
        let mut args = vec!["plot", "--out", path.to_str().unwrap()];
        args.extend(traces.iter().map(String::as_str));
        assert_eq!(code(&bench(&args)), 0);
        std::fs::read(path).unwrap()
    };
    let a = render("a.svg");
    assert_eq!(a, render("b.svg"));
    let svg = String::from_utf8(a).unwrap();
    assert!(svg.starts_with("<?xml") || svg.starts_with("<svg"));
    assert_eq!(svg.matches("<polyline class=\"curve\"").count(), 11);
    let legends: Vec<&str> = svg.match_indices("<text class=\"legend\"").map(|(i, _)| &svg[i..svg[i..].find("</text>").unwrap() + i]).collect();
    assert_eq!(legends.len(), 11);
    let mut distinct = legends.clone();
    distinct.sort();
    distinct.dedup();
    assert_eq!(distinct.len(), 11);
}

#[test]
fn plot_rejects_an_empty_list_and_mixed_experiments() {
    assert_eq!(code(&bench(&["plot", "--out", "/dev/null"])), 2);
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    bench(&["run", "--experiment", "minkowski-quadratic", "--p", "1", "--q", "1", "--out", a.to_str().unwrap()]);
    bench(&["run", "--experiment", "sphere-rayleigh", "--p", "1", "--q", "1", "--out", b.to_str().unwrap()]);
    let out = dir.path().join("mixed.svg");
    let res = bench(&["plot", "--out", out.to_str().unwrap(), a.with_extension("json").to_str().unwrap(), b.with_extension("json").to_str().unwrap()]);
    assert_ne!(code(&res), 0);
    assert!(!out.exists());
}

#[test]
fn empty_suite_exits_zero_with_an_empty_summary() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "empty.json", r#"{"rows": []}"#);
    let out = bench(&["suite", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let summary: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["rows"].as_array().unwrap().len(), 0);
}

#[test]
fn duplicate_output_paths_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let row = r#"{"experiment": "minkowski-quadratic", "p": 1, "q": 1, "out": "same"}"#;
    let cfg = write(dir.path(), "dup.json", &format!(r#"{{"rows": [{row}, {row}]}}"#));
    let out = bench(&["suite", "--config", cfg.to_str().unwrap()]);
    assert_ne!(code(&out), 0);
    assert!(String::from_utf8_lossy(&out.stderr).contains("same"));
    assert!(!dir.path().join("same.json").exists());
}

#[test]
fn reference_manifest_rows_all_converge() {
    let dir = tempfile::tempdir().unwrap();
    let out = bench(&["suite", "--config", manifest_path().to_str().unwrap(), "--out", dir.path().to_str().unwrap(), "--jobs", "4"]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    let summary: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("summary.json")).unwrap()).unwrap();
    let rows = summary["rows"].as_array().unwrap();
    assert!(rows.iter().all(|r| r["converged"] == true));
    for experiment in ["minkowski-quadratic", "sphere-rayleigh", "pseudosphere-distance"] {
        assert!(rows.iter().any(|r| r["experiment"] == experiment));
        assert!(dir.path().join(format!("{experiment}.svg")).exists());
    }
    assert!(dir.path().join("summary.txt").exists());
}

#[test]
fn check_exit_code_reflects_failed_lines() {
    let out = bench(&["check", "--instances", "3"]);
    let text = stdout(&out);
    let any_fail = text.lines().any(|l| l.starts_with("FAIL"));
    assert_eq!(code(&out), if any_fail { 3 } else { 0 });
    assert!(text.lines().filter(|l| l.starts_with("PASS") || l.starts_with("FAIL")).count() > 20);
}
