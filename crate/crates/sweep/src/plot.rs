//! Self-contained SVG waterfall plots: BER on a log axis against Eb/N0.

use std::fmt::Write as _;
use std::path::Path;

use crate::config::Method;
use crate::error::SweepError;
use crate::run::{ErrorCurve, Status};

pub const BER_MIN: f64 = 1e-6;
pub const BER_MAX: f64 = 1.0;

const WIDTH: f64 = 860.0;
const HEIGHT: f64 = 560.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 240.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 60.0;

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

/// Points of one (method, SF, K) curve, as (Eb/N0 dB, BER).
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub method: Method,
    pub sf: u32,
    pub k_factor: f64,
    pub points: Vec<(f64, f64)>,
}

impl Series {
    pub fn label(&self) -> String {
        format!("{} SF={} K={}", self.method, self.sf, self.k_factor)
    }
}

/// Groups the rows that carry a positive BER; rows are already sorted so
/// each group is contiguous and ordered in Eb/N0.
pub fn series(curve: &ErrorCurve) -> Vec<Series> {
    let mut out: Vec<Series> = Vec::new();
    for r in &curve.rows {
        let Some(ber) = r.ber.filter(|&b| r.status == Status::Ok && b > 0.0) else {
            continue;
        };
        match out.last_mut() {
            Some(s) if s.method == r.method && s.sf == r.sf && s.k_factor == r.k_factor => {
                s.points.push((r.ebn0_db, ber));
            }
            _ => out.push(Series {
                method: r.method,
                sf: r.sf,
                k_factor: r.k_factor,
                points: vec![(r.ebn0_db, ber)],
            }),
        }
    }
    out
}

/// Maps data coordinates to SVG pixels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlotLayout {
    pub db_min: f64,
    pub db_max: f64,
}

impl PlotLayout {
    pub fn for_curve(curve: &ErrorCurve) -> Self {
        let (lo, hi) = curve
            .rows
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| {
                (lo.min(r.ebn0_db), hi.max(r.ebn0_db))
            });
        if lo < hi {
            Self {
                db_min: lo,
                db_max: hi,
            }
        } else {
            Self {
                db_min: lo - 1.0,
                db_max: lo + 1.0,
            }
        }
    }

    pub fn x_of(&self, db: f64) -> f64 {
        LEFT + (db - self.db_min) / (self.db_max - self.db_min) * (WIDTH - LEFT - RIGHT)
    }

    /// Smaller pixel values are higher on the page.
    pub fn y_of(&self, ber: f64) -> f64 {
        let top = BER_MAX.log10();
        let bottom = BER_MIN.log10();
        // far below the axis still maps to a finite, clipped coordinate
        let l = ber.max(1e-300).log10();
        TOP + (top - l) / (top - bottom) * (HEIGHT - TOP - BOTTOM)
    }
}

fn tick_step(span: f64) -> f64 {
    let raw = span / 8.0;
    let mag = 10f64.powf(raw.log10().floor());
    [1.0, 2.0, 5.0, 10.0]
        .into_iter()
        .map(|m| m * mag)
        .find(|&s| s >= raw)
        .unwrap_or(10.0 * mag)
}

pub fn render_svg(curve: &ErrorCurve) -> Result<String, SweepError> {
    if curve.is_empty() {
        return Err(SweepError::EmptyCurve);
    }
    let layout = PlotLayout::for_curve(curve);
    let (x0, x1) = (LEFT, WIDTH - RIGHT);
    let (y0, y1) = (TOP, HEIGHT - BOTTOM);
    let mut svg = String::new();
    // writing into a String cannot fail
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(
        svg,
        r#"<defs><clipPath id="plot-area"><rect x="{x0}" y="{y0}" width="{}" height="{}"/></clipPath></defs>"#,
        x1 - x0,
        y1 - y0
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);

    let _ = writeln!(svg, r##"<g stroke="#ddd" stroke-width="1">"##);
    for e in (BER_MIN.log10() as i32)..=(BER_MAX.log10() as i32) {
        let y = layout.y_of(10f64.powi(e));
        let _ = writeln!(
            svg,
            r#"<line x1="{x0}" y1="{y:.2}" x2="{x1}" y2="{y:.2}"/>"#
        );
    }
    let step = tick_step(layout.db_max - layout.db_min);
    let mut ticks = Vec::new();
    let mut t = (layout.db_min / step).ceil() * step;
    while t <= layout.db_max + 1e-9 {
        ticks.push(t);
        t += step;
    }
    for &t in &ticks {
        let x = layout.x_of(t);
        let _ = writeln!(
            svg,
            r#"<line x1="{x:.2}" y1="{y0}" x2="{x:.2}" y2="{y1}"/>"#
        );
    }
    let _ = writeln!(svg, "</g>");

    let _ = writeln!(
        svg,
        r#"<rect x="{x0}" y="{y0}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        x1 - x0,
        y1 - y0
    );
    for e in (BER_MIN.log10() as i32)..=(BER_MAX.log10() as i32) {
        let y = layout.y_of(10f64.powi(e));
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{:.2}" text-anchor="end">1e{e}</text>"#,
            x0 - 6.0,
            y + 4.0
        );
    }
    for &t in &ticks {
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{}" text-anchor="middle">{t}</text>"#,
            layout.x_of(t),
            y1 + 18.0
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{}" text-anchor="middle">Eb/N0 (dB)</text>"#,
        0.5 * (x0 + x1),
        HEIGHT - 15.0
    );
    let _ = writeln!(
        svg,
        r#"<text transform="translate(20 {:.2}) rotate(-90)" text-anchor="middle">BER</text>"#,
        0.5 * (y0 + y1)
    );

    for (i, s) in series(curve).iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let _ = writeln!(svg, r#"<g class="series" data-label="{}">"#, s.label());
        if s.points.len() > 1 {
            let pts: Vec<String> = s
                .points
                .iter()
                .map(|&(db, ber)| format!("{:.2},{:.2}", layout.x_of(db), layout.y_of(ber)))
                .collect();
            let dash = if s.method == Method::Mc {
                r#" stroke-dasharray="4 3""#
            } else {
                ""
            };
            let _ = writeln!(
                svg,
                r#"<polyline clip-path="url(#plot-area)" fill="none" stroke="{color}" stroke-width="1.5"{dash} points="{}"/>"#,
                pts.join(" ")
            );
        } else {
            let (db, ber) = s.points[0];
            let _ = writeln!(
                svg,
                r#"<circle clip-path="url(#plot-area)" cx="{:.2}" cy="{:.2}" r="3" fill="{color}"/>"#,
                layout.x_of(db),
                layout.y_of(ber)
            );
        }
        let ly = y0 + 10.0 + 18.0 * i as f64;
        let _ = writeln!(
            svg,
            r#"<line x1="{}" y1="{ly:.2}" x2="{}" y2="{ly:.2}" stroke="{color}" stroke-width="2"/><text x="{}" y="{:.2}">{}</text>"#,
            x1 + 15.0,
            x1 + 40.0,
            x1 + 46.0,
            ly + 4.0,
            s.label()
        );
        let _ = writeln!(svg, "</g>");
    }
    let _ = writeln!(svg, "</svg>");
    Ok(svg)
}

pub fn emit_plot(curve: &ErrorCurve, path: &Path) -> Result<(), SweepError> {
    let svg = render_svg(curve)?;
    std::fs::write(path, svg).map_err(|e| SweepError::Io {
        path: path.to_path_buf(),
        source: e,
    })
}
