//! Static SVG 1.1 learning-curve chart.

use std::fmt::Write as _;
use std::path::Path;

use smadp_core::experiment::{to_db, LearningCurve};

use crate::output::OutputError;

const PALETTE: [&str; 10] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
    "#bcbd22", "#17becf",
];

/// Lowest value drawn, so `log10(0)` stays on the chart.
const DB_FLOOR: f64 = -120.0;
/// Curves longer than this are decimated by a fixed stride.
const MAX_POINTS: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    Mse,
    Msd,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SvgOptions {
    pub title: String,
    pub metric: Metric,
    pub width: f64,
    pub height: f64,
}

impl Default for SvgOptions {
    fn default() -> Self {
        SvgOptions {
            title: "Learning curves".into(),
            metric: Metric::Mse,
            width: 900.0,
            height: 540.0,
        }
    }
}

struct Frame {
    left: f64,
    top: f64,
    w: f64,
    h: f64,
    n: usize,
    y_lo: f64,
    y_hi: f64,
}

impl Frame {
    fn x(&self, i: usize) -> f64 {
        let span = (self.n.max(2) - 1) as f64;
        self.left + self.w * i as f64 / span
    }

    fn y(&self, db: f64) -> f64 {
        self.top + self.h * (self.y_hi - db) / (self.y_hi - self.y_lo)
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn series(c: &LearningCurve, metric: Metric) -> &[f64] {
    match metric {
        Metric::Mse => &c.mse,
        Metric::Msd => &c.msd,
    }
}

fn db_point(v: f64) -> f64 {
    to_db(v).max(DB_FLOOR)
}

/// Renders the chart to a string.
pub fn render_svg(curves: &[LearningCurve], options: &SvgOptions) -> Result<String, OutputError> {
    if curves.is_empty() {
        return Err(OutputError::NoCurves);
    }
    let n = curves.iter().map(|c| c.len()).max().unwrap_or(0);
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for c in curves {
        for &v in series(c, options.metric) {
            let d = db_point(v);
            lo = lo.min(d);
            hi = hi.max(d);
        }
    }
    if !lo.is_finite() || !hi.is_finite() {
        lo = -1.0;
        hi = 1.0;
    }
    // Round outward to 5 dB gridlines, keeping a non-empty range.
    let mut y_lo = (lo / 5.0).floor() * 5.0;
    let mut y_hi = (hi / 5.0).ceil() * 5.0;
    if y_hi - y_lo < 5.0 {
        y_lo -= 5.0;
        y_hi += 5.0;
    }
    let frame = Frame {
        left: 70.0,
        top: 40.0,
        w: options.width - 260.0,
        h: options.height - 100.0,
        n,
        y_lo,
        y_hi,
    };

    let mut s = String::new();
    writeln!(
        s,
        r#"<?xml version="1.0" encoding="UTF-8"?>
<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">
<rect x="0" y="0" width="{w}" height="{h}" fill="white"/>
<text x="{tx}" y="22" text-anchor="middle" font-size="15">{title}</text>"#,
        w = options.width,
        h = options.height,
        tx = frame.left + frame.w / 2.0,
        title = escape(&options.title)
    )
    .unwrap();

    // Axes and gridlines.
    let mut db = y_lo;
    while db <= y_hi + 1e-9 {
        let y = frame.y(db);
        writeln!(
            s,
            r##"<line class="grid" x1="{:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#e0e0e0"/>
<text x="{:.2}" y="{:.2}" text-anchor="end">{db}</text>"##,
            frame.left,
            frame.left + frame.w,
            frame.left - 6.0,
            y + 4.0
        )
        .unwrap();
        db += 5.0;
    }
    let step = 10f64
        .powf(((n.max(1) as f64) / 5.0).log10().floor())
        .max(1.0) as usize;
    let tick = [1, 2, 5, 10]
        .iter()
        .map(|k| k * step)
        .find(|t| n / t <= 8)
        .unwrap_or(10 * step);
    let mut i = 0;
    while i < n {
        writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{i}</text>"#,
            frame.x(i),
            frame.top + frame.h + 16.0
        )
        .unwrap();
        i += tick;
    }
    let ylabel = match options.metric {
        Metric::Mse => "MSE (dB)",
        Metric::Msd => "MSD (dB)",
    };
    writeln!(
        s,
        r##"<rect x="{l}" y="{t}" width="{fw}" height="{fh}" fill="none" stroke="#333"/>
<text x="{cx:.2}" y="{by:.2}" text-anchor="middle">iteration</text>
<text x="18" y="{cy:.2}" text-anchor="middle" transform="rotate(-90 18 {cy:.2})">{ylabel}</text>"##,
        l = frame.left,
        t = frame.top,
        fw = frame.w,
        fh = frame.h,
        cx = frame.left + frame.w / 2.0,
        by = frame.top + frame.h + 36.0,
        cy = frame.top + frame.h / 2.0,
    )
    .unwrap();

    // Phase boundaries.
    for r in curves[0].phase_ranges.iter().skip(1) {
        let x = frame.x(r.start);
        writeln!(
            s,
            r##"<line class="phase-boundary" x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="#555" stroke-dasharray="6,4"/>"##,
            frame.top,
            frame.top + frame.h
        )
        .unwrap();
    }

    for (k, c) in curves.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let data = series(c, options.metric);
        let stride = data.len().div_ceil(MAX_POINTS).max(1);
        let mut points = String::new();
        for (i, &v) in data.iter().enumerate() {
            if i % stride == 0 || i + 1 == data.len() {
                write!(points, "{:.2},{:.2} ", frame.x(i), frame.y(db_point(v))).unwrap();
            }
        }
        writeln!(
            s,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.2" points="{}"><title>{}</title></polyline>"#,
            points.trim_end(),
            escape(&c.label)
        )
        .unwrap();
    }

    // Legend.
    let lx = frame.left + frame.w + 20.0;
    for (k, c) in curves.iter().enumerate() {
        let y = frame.top + 10.0 + 20.0 * k as f64;
        writeln!(
            s,
            r#"<g class="legend-entry"><line x1="{lx:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="{}" stroke-width="2"/><text x="{:.2}" y="{:.2}">{}</text></g>"#,
            lx + 24.0,
            PALETTE[k % PALETTE.len()],
            lx + 30.0,
            y + 4.0,
            escape(&c.label)
        )
        .unwrap();
    }
    s.push_str("</svg>\n");
    Ok(s)
}

pub fn emit_svg(
    curves: &[LearningCurve],
    path: &Path,
    options: &SvgOptions,
) -> Result<(), OutputError> {
    let text = render_svg(curves, options)?;
    std::fs::write(path, text).map_err(|source| OutputError::Io {
        path: path.to_path_buf(),
        source,
    })
}
