//! Static line charts: the sweep parameter on x, one group of fields on the
//! left axis (solid) and an optional group on the right axis (dashed).

use std::fmt::Write as _;
use std::path::Path;

use super::IoError;
use crate::sweep::{field_series, Field, SweepRecord};

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 500.0;
const MARGIN_L: f64 = 80.0;
const MARGIN_R: f64 = 80.0;
const MARGIN_T: f64 = 40.0;
const MARGIN_B: f64 = 60.0;
const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"];

#[derive(Debug, Clone, PartialEq)]
pub struct PlotSpec {
    pub left: Vec<Field>,
    pub right: Vec<Field>,
    /// Modes to draw; every mode when `None`.
    pub modes: Option<Vec<usize>>,
    /// Parameter value of a dashed vertical reference line.
    pub marker: Option<f64>,
    pub x_label: String,
    pub title: Option<String>,
}

impl PlotSpec {
    pub fn new(left: Vec<Field>, right: Vec<Field>, x_label: &str) -> Self {
        Self { left, right, modes: None, marker: None, x_label: x_label.into(), title: None }
    }
}

struct Series {
    label: String,
    points: Vec<(f64, f64)>,
    right: bool,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn nice_step(span: f64) -> f64 {
    let raw = span / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let r = raw / mag;
    mag * if r < 1.5 {
        1.0
    } else if r < 3.5 {
        2.0
    } else if r < 7.5 {
        5.0
    } else {
        10.0
    }
}

/// Padded finite range of a set of values.
fn value_range(vals: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = vals.filter(|v| v.is_finite()).fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 * (1.0 + hi.abs()) {
        let pad = 0.5 * (1.0 + hi.abs()) * 1e-3;
        return (lo - pad, hi + pad);
    }
    let pad = 0.05 * (hi - lo);
    (lo - pad, hi + pad)
}

fn ticks(lo: f64, hi: f64) -> Vec<f64> {
    let step = nice_step(hi - lo);
    let mut t = (lo / step).ceil() * step;
    let mut out = Vec::new();
    while t <= hi + 1e-9 * step {
        out.push(if t.abs() < 1e-12 * step { 0.0 } else { t });
        t += step;
    }
    out
}

fn tick_label(v: f64) -> String {
    let s = format!("{v:.6}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" { "0".into() } else { s.into() }
}

fn collect(records: &[SweepRecord], spec: &PlotSpec) -> Result<Vec<Series>, IoError> {
    let n_modes = records.iter().map(|r| r.modes.len()).max().unwrap_or(0);
    let modes: Vec<usize> = spec.modes.clone().unwrap_or_else(|| (0..n_modes).collect());
    let mut out = Vec::new();
    for (fields, right) in [(&spec.left, false), (&spec.right, true)] {
        for field in fields {
            let mut any = false;
            for &m in &modes {
                let y = field_series(records, *field, m);
                any |= y.iter().any(|v| !v.is_nan());
                let points = records.iter().zip(y).map(|(r, v)| (r.param, v)).collect();
                out.push(Series { label: format!("{field} (mode {m})"), points, right });
            }
            if !any {
                return Err(IoError::MissingField(field.name()));
            }
        }
    }
    Ok(out)
}

/// The SVG document for `records`.
pub fn render_svg(records: &[SweepRecord], spec: &PlotSpec) -> Result<String, IoError> {
    if records.is_empty() {
        return Err(IoError::Empty("sweep has no records".into()));
    }
    if spec.left.is_empty() && spec.right.is_empty() {
        return Err(IoError::Empty("no fields requested".into()));
    }
    let series = collect(records, spec)?;
    let (x0, x1) = {
        let lo = records.first().map_or(0.0, |r| r.param);
        let hi = records.last().map_or(1.0, |r| r.param);
        if hi > lo { (lo, hi) } else { (lo - 0.5, hi + 0.5) }
    };
    let ys = |right: bool| value_range(series.iter().filter(|s| s.right == right).flat_map(|s| s.points.iter().map(|p| p.1)));
    let (yl, yr) = (ys(false), ys(true));
    let pw = WIDTH - MARGIN_L - MARGIN_R;
    let ph = HEIGHT - MARGIN_T - MARGIN_B;
    let sx = |x: f64| MARGIN_L + (x - x0) / (x1 - x0) * pw;
    let sy = |y: f64, r: (f64, f64)| MARGIN_T + (1.0 - (y - r.0) / (r.1 - r.0)) * ph;

    let mut s = String::new();
    let w = &mut s;
    writeln!(w, r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#).unwrap();
    writeln!(w, r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#).unwrap();
    if let Some(t) = &spec.title {
        writeln!(w, r#"<text x="{}" y="22" text-anchor="middle" font-size="15">{}</text>"#, WIDTH / 2.0, escape(t)).unwrap();
    }
    let (bx, by) = (MARGIN_L, MARGIN_T + ph);
    writeln!(w, r#"<rect x="{MARGIN_L}" y="{MARGIN_T}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#).unwrap();

    for t in ticks(x0, x1) {
        let x = sx(t);
        writeln!(w, r#"<line x1="{x:.2}" y1="{by}" x2="{x:.2}" y2="{:.2}" stroke="black"/>"#, by + 5.0).unwrap();
        writeln!(w, r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, by + 18.0, tick_label(t)).unwrap();
    }
    writeln!(w, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, bx + pw / 2.0, HEIGHT - 15.0, escape(&spec.x_label)).unwrap();

    let axis_label = |fields: &[Field]| fields.iter().map(Field::name).collect::<Vec<_>>().join(", ");
    for (right, range, fields) in [(false, yl, &spec.left), (true, yr, &spec.right)] {
        if fields.is_empty() {
            continue;
        }
        let ax = if right { MARGIN_L + pw } else { MARGIN_L };
        let (dir, anchor) = if right { (1.0, "start") } else { (-1.0, "end") };
        for t in ticks(range.0, range.1) {
            let y = sy(t, range);
            writeln!(w, r#"<line x1="{ax:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="black"/>"#, ax + 5.0 * dir).unwrap();
            writeln!(w, r#"<text x="{:.2}" y="{:.2}" text-anchor="{anchor}">{}</text>"#, ax + 8.0 * dir, y + 4.0, tick_label(t)).unwrap();
        }
        let lx = if right { WIDTH - 15.0 } else { 18.0 };
        let ly = MARGIN_T + ph / 2.0;
        writeln!(w, r#"<text x="{lx:.2}" y="{ly:.2}" text-anchor="middle" transform="rotate(-90 {lx:.2} {ly:.2})">{}</text>"#, escape(&axis_label(fields))).unwrap();
    }

    writeln!(w, r#"<g fill="none" stroke-width="1.8">"#).unwrap();
    for (i, se) in series.iter().enumerate() {
        let range = if se.right { yr } else { yl };
        let color = PALETTE[i % PALETTE.len()];
        let dash = if se.right { r#" stroke-dasharray="7 4""# } else { "" };
        let mut runs: Vec<Vec<(f64, f64)>> = vec![Vec::new()];
        for &(x, y) in &se.points {
            if y.is_finite() {
                runs.last_mut().unwrap().push((sx(x), sy(y, range)));
            } else if !runs.last().unwrap().is_empty() {
                runs.push(Vec::new());
            }
        }
        for run in runs.iter().filter(|r| !r.is_empty()) {
            let pts = run.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect::<Vec<_>>().join(" ");
            writeln!(w, r#"<polyline points="{pts}" stroke="{color}"{dash}/>"#).unwrap();
        }
    }
    writeln!(w, "</g>").unwrap();

    if let Some(m) = spec.marker {
        if (x0..=x1).contains(&m) {
            let x = sx(m);
            writeln!(w, r#"<line class="marker" x1="{x:.2}" y1="{MARGIN_T}" x2="{x:.2}" y2="{by}" stroke="gray" stroke-width="1.2" stroke-dasharray="3 3"/>"#).unwrap();
        }
    }

    writeln!(w, r#"<g class="legend">"#).unwrap();
    for (i, se) in series.iter().enumerate() {
        let y = MARGIN_T + 14.0 + 16.0 * i as f64;
        let x = MARGIN_L + pw - 190.0;
        let color = PALETTE[i % PALETTE.len()];
        let dash = if se.right { r#" stroke-dasharray="7 4""# } else { "" };
        writeln!(w, r#"<line x1="{x:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="{color}" stroke-width="1.8"{dash}/>"#, x + 24.0).unwrap();
        writeln!(w, r#"<text x="{:.2}" y="{:.2}">{}</text>"#, x + 30.0, y + 4.0, escape(&se.label)).unwrap();
    }
    writeln!(w, "</g>\n</svg>").unwrap();
    Ok(s)
}

pub fn emit_svg(records: &[SweepRecord], spec: &PlotSpec, path: &Path) -> Result<(), IoError> {
    let text = render_svg(records, spec)?;
    std::fs::write(path, text).map_err(|e| IoError::io(path, e))
}
