//! Performance-understanding plots as standalone SVG.
//!
//! One scatter per feature: morph step on x, feature value on y, one marker
//! per (pair, step) filled by the pair's min-max normalised MASE, and a
//! vertical colour bar for that scale on the right.

use std::fmt::Write as _;

use thiserror::Error;
use tsmorph_core::analysis::normalize_min_max;
use tsmorph_core::MorphAnalysisReport;

#[derive(Debug, Error, PartialEq)]
pub enum PlotError {
    #[error("feature {0:?} is not in the report")]
    FeatureNotInReport(String),
    #[error("malformed report: {0}")]
    MalformedReport(String),
    #[error("invalid plot settings: {0}")]
    InvalidSpec(String),
}

pub type Rgb = [u8; 3];

#[derive(Debug, Clone, PartialEq)]
pub struct PlotSpec {
    pub feature: String,
    pub marker_size: f64,
    pub width: u32,
    pub height: u32,
    /// Fill at relative MASE 0.
    pub low_color: Rgb,
    /// Fill at relative MASE 1.
    pub high_color: Rgb,
}

impl PlotSpec {
    pub fn new(feature: impl Into<String>) -> Self {
        Self {
            feature: feature.into(),
            marker_size: 4.0,
            width: 640,
            height: 420,
            low_color: [68, 1, 84],
            high_color: [253, 231, 37],
        }
    }
}

pub fn ramp(low: Rgb, high: Rgb, t: f64) -> Rgb {
    let t = t.clamp(0.0, 1.0);
    let mut out = [0u8; 3];
    for i in 0..3 {
        let (a, b) = (f64::from(low[i]), f64::from(high[i]));
        out[i] = (a + (b - a) * t).round() as u8;
    }
    out
}

fn rgb(c: Rgb) -> String {
    format!("rgb({},{},{})", c[0], c[1], c[2])
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

const MARGIN_LEFT: f64 = 72.0;
const MARGIN_RIGHT: f64 = 110.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 50.0;
const Y_TICKS: usize = 5;

struct Point {
    pair: usize,
    step: usize,
    value: f64,
    relative: f64,
}

fn collect_points(report: &MorphAnalysisReport, feature: &str) -> Result<Vec<Point>, PlotError> {
    let mut points = Vec::new();
    for (p, table) in report.per_pair.iter().enumerate() {
        let (relative, _) = normalize_min_max(&table.mase_values());
        for (row, rel) in table.rows.iter().zip(relative) {
            if row.step >= report.config.n {
                return Err(PlotError::MalformedReport(format!(
                    "step {} outside 0..{}",
                    row.step, report.config.n
                )));
            }
            let Some(value) = row.features.get(feature) else { continue };
            if !value.is_finite() {
                return Err(PlotError::MalformedReport(format!("non-finite {feature} value")));
            }
            points.push(Point { pair: p, step: row.step, value, relative: rel });
        }
    }
    Ok(points)
}

/// Renders the plot for `spec.feature`. Output depends only on the inputs.
pub fn render_svg(report: &MorphAnalysisReport, spec: &PlotSpec) -> Result<String, PlotError> {
    if spec.width == 0 || spec.height == 0 || spec.marker_size.is_nan() || spec.marker_size <= 0.0 {
        return Err(PlotError::InvalidSpec("dimensions and marker size must be positive".into()));
    }
    if !report.correlations.contains_key(&spec.feature) {
        return Err(PlotError::FeatureNotInReport(spec.feature.clone()));
    }
    if report.config.n == 0 {
        return Err(PlotError::MalformedReport("n is zero".into()));
    }
    let points = collect_points(report, &spec.feature)?;

    let (w, h) = (f64::from(spec.width), f64::from(spec.height));
    let (x0, x1) = (MARGIN_LEFT, (w - MARGIN_RIGHT).max(MARGIN_LEFT + 1.0));
    let (y0, y1) = (MARGIN_TOP, (h - MARGIN_BOTTOM).max(MARGIN_TOP + 1.0));

    let (mut lo, mut hi) = points
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| (lo.min(p.value), hi.max(p.value)));
    if points.is_empty() {
        (lo, hi) = (0.0, 1.0);
    }
    if hi - lo <= f64::EPSILON * hi.abs().max(1.0) {
        let pad = if lo == 0.0 { 0.5 } else { lo.abs() * 0.1 };
        (lo, hi) = (lo - pad, hi + pad);
    } else {
        let pad = (hi - lo) * 0.05;
        (lo, hi) = (lo - pad, hi + pad);
    }
    let steps = report.config.n;
    let sx = |step: usize| {
        if steps == 1 {
            (x0 + x1) / 2.0
        } else {
            x0 + (x1 - x0) * step as f64 / (steps - 1) as f64
        }
    };
    let sy = |v: f64| y1 - (y1 - y0) * (v - lo) / (hi - lo);

    let mut svg = String::new();
    let title = escape(&spec.feature);
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" viewBox="0 0 {} {}">"#,
        spec.width, spec.height, spec.width, spec.height
    );
    let _ = writeln!(svg, "<title>{title}</title>");
    let _ = writeln!(
        svg,
        r#"<defs><linearGradient id="mase-ramp" x1="0" y1="1" x2="0" y2="0"><stop offset="0" stop-color="{}"/><stop offset="1" stop-color="{}"/></linearGradient></defs>"#,
        rgb(spec.low_color),
        rgb(spec.high_color)
    );
    let _ = writeln!(svg, r#"<rect x="0" y="0" width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-family="sans-serif" font-size="16">{title}</text>"#,
        (x0 + x1) / 2.0,
        MARGIN_TOP / 2.0 + 6.0
    );

    // axes
    let _ = writeln!(svg, r#"<g class="axes" stroke="black" stroke-width="1">"#);
    let _ = writeln!(svg, r#"<line x1="{x0:.2}" y1="{y1:.2}" x2="{x1:.2}" y2="{y1:.2}"/>"#);
    let _ = writeln!(svg, r#"<line x1="{x0:.2}" y1="{y0:.2}" x2="{x0:.2}" y2="{y1:.2}"/>"#);
    let _ = writeln!(svg, "</g>");

    let _ = writeln!(svg, r#"<g class="ticks" font-family="sans-serif" font-size="11">"#);
    let stride = steps.div_ceil(10).max(1);
    for step in (0..steps).step_by(stride) {
        let x = sx(step);
        let _ = writeln!(
            svg,
            r#"<line x1="{x:.2}" y1="{y1:.2}" x2="{x:.2}" y2="{:.2}" stroke="black"/><text x="{x:.2}" y="{:.2}" text-anchor="middle">{step}</text>"#,
            y1 + 5.0,
            y1 + 18.0
        );
    }
    for i in 0..Y_TICKS {
        let v = lo + (hi - lo) * i as f64 / (Y_TICKS - 1) as f64;
        let y = sy(v);
        let _ = writeln!(
            svg,
            r#"<line x1="{:.2}" y1="{y:.2}" x2="{x0:.2}" y2="{y:.2}" stroke="black"/><text x="{:.2}" y="{:.2}" text-anchor="end">{v:.3}</text>"#,
            x0 - 5.0,
            x0 - 8.0,
            y + 4.0
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">morph step</text>"#,
        (x0 + x1) / 2.0,
        h - 10.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {:.2})">{title}</text>"#,
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0
    );
    let _ = writeln!(svg, "</g>");

    let _ = writeln!(svg, r#"<g class="markers" stroke="black" stroke-width="0.5">"#);
    for p in &points {
        let _ = writeln!(
            svg,
            r#"<circle class="marker" data-pair="{}" data-step="{}" cx="{:.2}" cy="{:.2}" r="{:.2}" fill="{}"/>"#,
            p.pair,
            p.step,
            sx(p.step),
            sy(p.value),
            spec.marker_size,
            rgb(ramp(spec.low_color, spec.high_color, p.relative))
        );
    }
    let _ = writeln!(svg, "</g>");

    let bar_x = x1 + 30.0;
    let _ = writeln!(svg, r#"<g class="colorbar" font-family="sans-serif" font-size="11">"#);
    let _ = writeln!(
        svg,
        r#"<rect x="{bar_x:.2}" y="{y0:.2}" width="16" height="{:.2}" fill="url(#mase-ramp)" stroke="black" stroke-width="0.5"/>"#,
        y1 - y0
    );
    let _ = writeln!(svg, r#"<text x="{:.2}" y="{:.2}">1</text>"#, bar_x + 22.0, y0 + 4.0);
    let _ = writeln!(svg, r#"<text x="{:.2}" y="{:.2}">0</text>"#, bar_x + 22.0, y1 + 4.0);
    let mid = (y0 + y1) / 2.0;
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{mid:.2}" text-anchor="middle" transform="rotate(90 {:.2} {mid:.2})">relative MASE</text>"#,
        bar_x + 42.0,
        bar_x + 42.0
    );
    let _ = writeln!(svg, "</g>");
    svg.push_str("</svg>\n");
    Ok(svg)
}
