//! Semilog convergence plots as plain SVG 1.1.

use std::fmt::Write as _;

use crate::error::{BenchError, BenchResult};
use crate::trace::TraceFile;

const WIDTH: f64 = 820.0;
const HEIGHT: f64 = 520.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 220.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;
const PALETTE: [&str; 12] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
    "#393b79", "#637939",
];

/// Quantity on the y axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PlotMetric {
    /// `err_sq` when every trace has it, else the stationarity measure.
    #[default]
    Auto,
    ErrSq,
    Value,
    Stationarity,
}

#[derive(Debug, Clone, Default)]
pub struct PlotStyle {
    pub metric: PlotMetric,
    pub title: Option<String>,
}

fn series(t: &TraceFile, metric: PlotMetric) -> Vec<(f64, f64)> {
    t.records
        .iter()
        .filter_map(|r| {
            let y = match metric {
                PlotMetric::ErrSq | PlotMetric::Auto => r.err_sq?,
                PlotMetric::Value => r.f,
                PlotMetric::Stationarity => r.stationarity,
            };
            (y > 0.0 && y.is_finite()).then_some((r.k as f64, y))
        })
        .collect()
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

pub fn legend_label(t: &TraceFile) -> String {
    let s = &t.spec;
    let mut label = format!("p={} q={} {}", s.p, s.q, s.optimizer);
    if s.frames != crate::experiment::FrameChoice::Standard {
        let _ = write!(label, " {} f{}", s.frames, s.frame_seed.unwrap_or(s.seed));
    }
    label
}

/// One polyline per trace on a log-scaled y axis.
pub fn emit_plot(traces: &[TraceFile], style: &PlotStyle) -> BenchResult<String> {
    let first = traces.first().ok_or(BenchError::EmptyPlot)?;
    if let Some(other) = traces.iter().find(|t| t.spec.experiment != first.spec.experiment) {
        return Err(BenchError::MixedExperiments(first.spec.experiment.to_string(), other.spec.experiment.to_string()));
    }
    let metric = match style.metric {
        PlotMetric::Auto if traces.iter().all(|t| t.records.iter().any(|r| r.err_sq.is_some())) => PlotMetric::ErrSq,
        PlotMetric::Auto => PlotMetric::Stationarity,
        m => m,
    };
    let ylabel = match metric {
        PlotMetric::ErrSq | PlotMetric::Auto => "squared error",
        PlotMetric::Value => "f",
        PlotMetric::Stationarity => "stationarity",
    };
    let all: Vec<Vec<(f64, f64)>> = traces.iter().map(|t| series(t, metric)).collect();
    let kmax = all.iter().flatten().map(|p| p.0).fold(1.0, f64::max);
    let (mut lo, mut hi) = all
        .iter()
        .flatten()
        .map(|p| p.1.log10())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), y| (a.min(y), b.max(y)));
    if !lo.is_finite() {
        (lo, hi) = (-1.0, 1.0);
    }
    let (lo, hi) = (lo.floor(), hi.ceil().max(lo.floor() + 1.0));
    let pw = WIDTH - LEFT - RIGHT;
    let ph = HEIGHT - TOP - BOTTOM;
    let sx = |k: f64| LEFT + pw * k / kmax;
    let sy = |y: f64| TOP + ph * (hi - y.log10()) / (hi - lo);

    let mut s = String::new();
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let title = style.title.clone().unwrap_or_else(|| first.spec.experiment.to_string());
    let _ = writeln!(s, r#"<text x="{:.1}" y="24" text-anchor="middle" font-size="15">{}</text>"#, LEFT + pw / 2.0, escape(&title));
    let _ = writeln!(s, r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#);
    let decades = (hi - lo) as i64;
    let every = (decades / 10).max(1);
    for d in (0..=decades).filter(|d| d % every == 0) {
        let e = lo as i64 + d;
        let y = sy(10f64.powi(e as i32));
        let _ = writeln!(s, r##"<line x1="{LEFT}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#dddddd"/>"##, LEFT + pw);
        let _ = writeln!(s, r#"<text x="{:.1}" y="{:.2}" text-anchor="end">1e{e}</text>"#, LEFT - 6.0, y + 4.0);
    }
    for i in 0..=5 {
        let k = kmax * i as f64 / 5.0;
        let x = sx(k);
        let _ = writeln!(s, r#"<text x="{x:.2}" y="{:.1}" text-anchor="middle">{:.0}</text>"#, TOP + ph + 18.0, k);
    }
    let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">iteration</text>"#, LEFT + pw / 2.0, HEIGHT - 16.0);
    let _ = writeln!(
        s,
        r#"<text x="20" y="{:.1}" text-anchor="middle" transform="rotate(-90 20 {:.1})">{ylabel}</text>"#,
        TOP + ph / 2.0,
        TOP + ph / 2.0
    );
    for (i, (t, pts)) in traces.iter().zip(&all).enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let points: Vec<String> = pts.iter().map(|&(k, y)| format!("{:.2},{:.2}", sx(k), sy(y))).collect();
        let _ = writeln!(
            s,
            r#"<polyline class="curve" fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
            points.join(" ")
        );
        let ly = TOP + 14.0 + 16.0 * i as f64;
        let lx = LEFT + pw + 12.0;
        let _ = writeln!(s, r#"<line x1="{lx:.1}" y1="{:.1}" x2="{:.1}" y2="{:.1}" stroke="{color}" stroke-width="2"/>"#, ly - 4.0, lx + 20.0, ly - 4.0);
        let _ = writeln!(s, r#"<text class="legend" x="{:.1}" y="{ly:.1}">{}</text>"#, lx + 26.0, escape(&legend_label(t)));
    }
    s.push_str("</svg>\n");
    Ok(s)
}
