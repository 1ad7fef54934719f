//! Minimal SVG figures: matrix heatmaps, 2-D scatters, persistence diagrams.

use std::fmt::Write;

use geofusion::persistence::PersistencePoint;
use geofusion::types::SquareMatrix;

const SIZE: f64 = 480.0;
const MARGIN: f64 = 40.0;

/// Viridis control points, linearly interpolated.
const VIRIDIS: [[f64; 3]; 5] = [
    [68.0, 1.0, 84.0],
    [59.0, 82.0, 139.0],
    [33.0, 145.0, 140.0],
    [94.0, 201.0, 98.0],
    [253.0, 231.0, 37.0],
];

fn color(t: f64) -> String {
    let t = if t.is_finite() { t.clamp(0.0, 1.0) } else { 0.0 };
    let x = t * (VIRIDIS.len() - 1) as f64;
    let i = (x.floor() as usize).min(VIRIDIS.len() - 2);
    let f = x - i as f64;
    let c: Vec<u8> = (0..3)
        .map(|k| (VIRIDIS[i][k] + f * (VIRIDIS[i + 1][k] - VIRIDIS[i][k])).round() as u8)
        .collect();
    format!("#{:02x}{:02x}{:02x}", c[0], c[1], c[2])
}

fn header(out: &mut String, w: f64, h: f64, title: &str) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(out, r#"<text x="{}" y="20" text-anchor="middle">{}</text>"#, w / 2.0, escape(title));
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

pub struct Heatmap {
    pub svg: String,
    pub scale_min: f64,
    pub scale_max: f64,
}

/// Linear colour scale from the matrix minimum to its maximum.
pub fn heatmap(m: &SquareMatrix, title: &str) -> Heatmap {
    let n = m.n();
    let (lo, hi) = m
        .as_slice()
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let span = if hi > lo { hi - lo } else { 1.0 };
    let cell = SIZE / n.max(1) as f64;
    let mut svg = String::new();
    header(&mut svg, SIZE + 2.0 * MARGIN + 40.0, SIZE + 2.0 * MARGIN, title);
    let _ = writeln!(svg, r#"<g transform="translate({MARGIN},{MARGIN})" shape-rendering="crispEdges">"#);
    for i in 0..n {
        for j in 0..n {
            let _ = writeln!(
                svg,
                r#"<rect x="{:.3}" y="{:.3}" width="{:.3}" height="{:.3}" fill="{}"/>"#,
                j as f64 * cell,
                i as f64 * cell,
                cell,
                cell,
                color((m.get(i, j) - lo) / span)
            );
        }
    }
    svg.push_str("</g>\n");
    let bar_x = SIZE + MARGIN + 12.0;
    for s in 0..64 {
        let t = s as f64 / 63.0;
        let _ = writeln!(
            svg,
            r#"<rect x="{bar_x}" y="{:.3}" width="14" height="{:.3}" fill="{}"/>"#,
            MARGIN + (1.0 - t) * SIZE - SIZE / 64.0,
            SIZE / 64.0 + 0.5,
            color(t)
        );
    }
    let _ = writeln!(svg, r#"<text x="{bar_x}" y="{}" font-size="10">{hi:.3}</text>"#, MARGIN - 4.0);
    let _ = writeln!(svg, r#"<text x="{bar_x}" y="{}" font-size="10">{lo:.3}</text>"#, MARGIN + SIZE + 14.0);
    svg.push_str("</svg>\n");
    Heatmap { svg, scale_min: lo, scale_max: hi }
}

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !lo.is_finite() {
        (0.0, 1.0)
    } else if hi > lo {
        (lo, hi)
    } else {
        (lo - 0.5, hi + 0.5)
    }
}

/// First two coordinates, coloured by row order and joined in sequence.
pub fn scatter(coords: &[Vec<f64>], title: &str) -> String {
    let x = |r: &Vec<f64>| r.first().copied().unwrap_or(0.0);
    let y = |r: &Vec<f64>| r.get(1).copied().unwrap_or(0.0);
    let (x0, x1) = bounds(coords.iter().map(x));
    let (y0, y1) = bounds(coords.iter().map(y));
    let px = |v: f64| MARGIN + (v - x0) / (x1 - x0) * SIZE;
    let py = |v: f64| MARGIN + SIZE - (v - y0) / (y1 - y0) * SIZE;
    let mut svg = String::new();
    header(&mut svg, SIZE + 2.0 * MARGIN, SIZE + 2.0 * MARGIN, title);
    let path: Vec<String> = coords.iter().map(|r| format!("{:.3},{:.3}", px(x(r)), py(y(r)))).collect();
    let _ = writeln!(svg, r##"<polyline points="{}" fill="none" stroke="#bbbbbb" stroke-width="0.7"/>"##, path.join(" "));
    let n = coords.len().max(2) - 1;
    for (i, r) in coords.iter().enumerate() {
        let _ = writeln!(
            svg,
            r#"<circle cx="{:.3}" cy="{:.3}" r="3" fill="{}"/>"#,
            px(x(r)),
            py(y(r)),
            color(i as f64 / n as f64)
        );
    }
    svg.push_str("</svg>\n");
    svg
}

const DIM_COLORS: [&str; 3] = ["#1f77b4", "#ff7f0e", "#2ca02c"];

/// Birth against death with the diagonal; essential classes sit on a dashed
/// line above the largest finite value.
pub fn diagram(points: &[PersistencePoint], title: &str) -> String {
    let finite_max = points
        .iter()
        .flat_map(|p| [p.birth, p.death])
        .filter(|v| v.is_finite())
        .fold(0.0f64, f64::max);
    let top = if finite_max > 0.0 { finite_max * 1.1 } else { 1.0 };
    let s = |v: f64| v / top * SIZE;
    let mut svg = String::new();
    header(&mut svg, SIZE + 2.0 * MARGIN, SIZE + 2.0 * MARGIN, title);
    let _ = writeln!(svg, r#"<g transform="translate({MARGIN},{})">"#, MARGIN + SIZE);
    let _ = writeln!(svg, r#"<rect x="0" y="{}" width="{SIZE}" height="{SIZE}" fill="none" stroke="black"/>"#, -SIZE);
    let _ = writeln!(svg, r##"<line x1="0" y1="0" x2="{SIZE}" y2="{}" stroke="#888888"/>"##, -SIZE);
    let inf_y = -s(top) + 8.0;
    let _ = writeln!(
        svg,
        r##"<line x1="0" y1="{inf_y:.3}" x2="{SIZE}" y2="{inf_y:.3}" stroke="#888888" stroke-dasharray="4 3"/>"##
    );
    let _ = writeln!(svg, r#"<text x="-28" y="{:.3}" font-size="10">inf</text>"#, inf_y + 3.0);
    for p in points {
        let yv = if p.death.is_finite() { -s(p.death) } else { inf_y };
        let _ = writeln!(
            svg,
            r#"<circle cx="{:.3}" cy="{:.3}" r="3.5" fill="{}" fill-opacity="0.8"/>"#,
            s(p.birth),
            yv,
            DIM_COLORS[p.dim.min(2)]
        );
    }
    let _ = writeln!(svg, r#"<text x="{}" y="30" text-anchor="middle">birth</text>"#, SIZE / 2.0);
    for (d, c) in DIM_COLORS.iter().enumerate() {
        let _ = writeln!(svg, r#"<circle cx="{}" cy="{}" r="4" fill="{c}"/>"#, SIZE - 70.0, -SIZE + 16.0 + 16.0 * d as f64);
        let _ = writeln!(svg, r#"<text x="{}" y="{}">H{d}</text>"#, SIZE - 60.0, -SIZE + 20.0 + 16.0 * d as f64);
    }
    svg.push_str("</g>\n");
    let _ = writeln!(
        svg,
        r#"<text x="14" y="{}" transform="rotate(-90 14 {})" text-anchor="middle">death</text>"#,
        MARGIN + SIZE / 2.0,
        MARGIN + SIZE / 2.0
    );
    svg.push_str("</svg>\n");
    svg
}
