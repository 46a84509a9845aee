//! Static SVG charts of a report: for every `(method, δ)` pair one panel of
//! FDR against `n` with a reference line at `q`, and one panel of power.
//! Each `α` is a separate series.

use std::fmt::Write as _;

use crate::experiments::{ExperimentReport, Method};
use crate::io::fmt_num;

const PANEL_W: f64 = 380.0;
const PANEL_H: f64 = 250.0;
const MARGIN_L: f64 = 56.0;
const MARGIN_R: f64 = 96.0;
const MARGIN_T: f64 = 30.0;
const MARGIN_B: f64 = 42.0;
const COLORS: [&str; 6] = [
    "#1b9e77", "#d95f02", "#7570b3", "#e7298a", "#66a61e", "#e6ab02",
];

struct Series {
    label: String,
    points: Vec<(f64, f64)>,
}

struct Panel {
    title: String,
    y_label: &'static str,
    series: Vec<Series>,
    reference: Option<f64>,
}

pub fn render_svg(report: &ExperimentReport) -> String {
    let mut keys: Vec<(Method, f64)> = Vec::new();
    for r in &report.rows {
        if !keys.iter().any(|(m, d)| *m == r.method && *d == r.delta) {
            keys.push((r.method, r.delta));
        }
    }
    let mut alphas: Vec<f64> = Vec::new();
    for r in &report.rows {
        if !alphas.contains(&r.alpha) {
            alphas.push(r.alpha);
        }
    }

    let mut panels = Vec::new();
    for &(method, delta) in &keys {
        let mut fdr = Vec::new();
        let mut power = Vec::new();
        for &alpha in &alphas {
            let mut rows: Vec<_> = report
                .rows
                .iter()
                .filter(|r| r.method == method && r.delta == delta && r.alpha == alpha)
                .collect();
            rows.sort_by_key(|r| r.n);
            let label = format!("α = {}", fmt_num(alpha));
            fdr.push(Series {
                label: label.clone(),
                points: rows
                    .iter()
                    .filter(|r| r.fdr.is_finite())
                    .map(|r| (r.n as f64, r.fdr))
                    .collect(),
            });
            power.push(Series {
                label,
                points: rows
                    .iter()
                    .filter_map(|r| r.power.map(|p| (r.n as f64, p)))
                    .collect(),
            });
        }
        let title = format!("{}, δ = {}", method.name(), fmt_num(delta));
        panels.push((
            Panel {
                title: format!("{title}: FDR"),
                y_label: "FDR",
                series: fdr,
                reference: Some(report.q),
            },
            Panel {
                title: format!("{title}: power"),
                y_label: "power",
                series: power,
                reference: None,
            },
        ));
    }

    let cell_w = MARGIN_L + PANEL_W + MARGIN_R;
    let cell_h = MARGIN_T + PANEL_H + MARGIN_B;
    let width = 2.0 * cell_w;
    let height = cell_h * panels.len().max(1) as f64;
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    if panels.is_empty() {
        let _ = writeln!(svg, r#"<text x="20" y="30">empty report</text>"#);
    }
    for (row, (left, right)) in panels.iter().enumerate() {
        let top = row as f64 * cell_h;
        draw_panel(&mut svg, left, 0.0, top);
        draw_panel(&mut svg, right, cell_w, top);
    }
    svg.push_str("</svg>\n");
    svg
}

fn draw_panel(svg: &mut String, panel: &Panel, left: f64, top: f64) {
    let x0 = left + MARGIN_L;
    let y0 = top + MARGIN_T;
    let pts = panel.series.iter().flat_map(|s| s.points.iter());
    let (mut x_min, mut x_max) = (f64::INFINITY, f64::NEG_INFINITY);
    // Power lives in [0, 1]; FDR panels zoom in but always show the reference.
    let mut y_max = match panel.reference {
        Some(q) => 1.25 * q,
        None => 1.0,
    };
    for &(x, y) in pts {
        x_min = x_min.min(x);
        x_max = x_max.max(x);
        y_max = y_max.max(y);
    }
    if !x_min.is_finite() {
        x_min = 0.0;
        x_max = 1.0;
    }
    if x_max == x_min {
        x_min -= 0.1 * x_min.abs().max(1.0);
        x_max += 0.1 * x_max.abs().max(1.0);
    }
    let y_max = nice_ceiling(y_max);
    let sx = |x: f64| x0 + (x - x_min) / (x_max - x_min) * PANEL_W;
    let sy = |y: f64| y0 + PANEL_H - y / y_max * PANEL_H;

    let _ = writeln!(
        svg,
        r#"<text x="{:.1}" y="{:.1}" font-size="13" text-anchor="middle">{}</text>"#,
        x0 + PANEL_W / 2.0,
        top + 18.0,
        escape(&panel.title)
    );
    let _ = writeln!(
        svg,
        r##"<rect x="{x0:.1}" y="{y0:.1}" width="{PANEL_W}" height="{PANEL_H}" fill="none" stroke="#444"/>"##
    );
    for i in 0..=5 {
        let y = y_max * i as f64 / 5.0;
        let py = sy(y);
        let _ = writeln!(
            svg,
            r##"<line x1="{:.1}" y1="{py:.1}" x2="{x0:.1}" y2="{py:.1}" stroke="#444"/><text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"##,
            x0 - 4.0,
            x0 - 6.0,
            py + 4.0,
            fmt_num((y * 1e6).round() / 1e6)
        );
    }
    let mut xs: Vec<f64> = panel
        .series
        .iter()
        .flat_map(|s| s.points.iter().map(|p| p.0))
        .collect();
    xs.sort_by(|a, b| a.total_cmp(b));
    xs.dedup();
    for x in xs {
        let px = sx(x);
        let base = y0 + PANEL_H;
        let _ = writeln!(
            svg,
            r##"<line x1="{px:.1}" y1="{base:.1}" x2="{px:.1}" y2="{:.1}" stroke="#444"/><text x="{px:.1}" y="{:.1}" text-anchor="middle">{}</text>"##,
            base + 4.0,
            base + 16.0,
            fmt_num(x)
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">n</text>"#,
        x0 + PANEL_W / 2.0,
        y0 + PANEL_H + 34.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" transform="rotate(-90 {:.1} {:.1})">{}</text>"#,
        left + 14.0,
        y0 + PANEL_H / 2.0,
        left + 14.0,
        y0 + PANEL_H / 2.0,
        panel.y_label
    );
    if let Some(q) = panel.reference {
        let py = sy(q);
        let _ = writeln!(
            svg,
            r##"<line x1="{x0:.1}" y1="{py:.1}" x2="{:.1}" y2="{py:.1}" stroke="#c00" stroke-dasharray="6 4"/><text x="{:.1}" y="{:.1}" fill="#c00">q = {}</text>"##,
            x0 + PANEL_W,
            x0 + PANEL_W + 6.0,
            py + 4.0,
            fmt_num(q)
        );
    }
    for (i, s) in panel.series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        if !s.points.is_empty() {
            let path: Vec<String> = s
                .points
                .iter()
                .map(|&(x, y)| format!("{:.1},{:.1}", sx(x), sy(y)))
                .collect();
            let _ = writeln!(
                svg,
                r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#,
                path.join(" ")
            );
            for &(x, y) in &s.points {
                let _ = writeln!(
                    svg,
                    r#"<circle cx="{:.1}" cy="{:.1}" r="3" fill="{color}"/>"#,
                    sx(x),
                    sy(y)
                );
            }
        }
        let ly = y0 + 14.0 + 16.0 * i as f64;
        let lx = x0 + PANEL_W + 8.0;
        let _ = writeln!(
            svg,
            r#"<line x1="{lx:.1}" y1="{:.1}" x2="{:.1}" y2="{:.1}" stroke="{color}" stroke-width="2"/><text x="{:.1}" y="{:.1}">{}</text>"#,
            ly + 20.0,
            lx + 16.0,
            ly + 20.0,
            lx + 20.0,
            ly + 24.0,
            escape(&s.label)
        );
    }
}

/// Smallest of `1, 2, 2.5, 5` times a power of ten that is `>= y`.
fn nice_ceiling(y: f64) -> f64 {
    let scale = 10f64.powf(y.log10().floor());
    for m in [1.0, 2.0, 2.5, 5.0, 10.0] {
        if m * scale >= y * (1.0 - 1e-12) {
            return m * scale;
        }
    }
    10.0 * scale
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}
