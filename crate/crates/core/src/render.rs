//! Plain SVG output for the focal scatter and the colored network.

use std::collections::BTreeMap;
use std::fmt::Write;

use crate::layout::LayoutPositions;
use crate::mapper::MapperNetwork;
use crate::opportunity::FocalReport;

const SIZE: f64 = 600.0;
const MARGIN: f64 = 50.0;

fn header(out: &mut String, width: f64, height: f64) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
}

/// Functional similarity on x, cross-capacity on y, both over `[-1, 1]`,
/// with the diagonal drawn and the focal marked by a larger red circle.
pub fn scatter_svg(report: &FocalReport) -> String {
    let plot = SIZE - 2.0 * MARGIN;
    let sx = |v: f64| MARGIN + (v + 1.0) / 2.0 * plot;
    let sy = |v: f64| SIZE - MARGIN - (v + 1.0) / 2.0 * plot;
    let mut out = String::new();
    header(&mut out, SIZE, SIZE);
    let _ = writeln!(
        out,
        r##"<rect x="{MARGIN}" y="{MARGIN}" width="{plot}" height="{plot}" fill="none" stroke="#444"/>"##
    );
    let _ = writeln!(
        out,
        r##"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="#888" stroke-dasharray="6,4"/>"##,
        sx(-1.0),
        sy(-1.0),
        sx(1.0),
        sy(1.0)
    );
    for t in [-1.0, -0.5, 0.0, 0.5, 1.0] {
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" font-size="11" text-anchor="middle">{t}</text>"#,
            sx(t),
            SIZE - MARGIN + 16.0
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" font-size="11" text-anchor="end">{t}</text>"#,
            MARGIN - 6.0,
            sy(t) + 4.0
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" font-size="13" text-anchor="middle">functional similarity</text>"#,
        SIZE / 2.0,
        SIZE - 12.0
    );
    let _ = writeln!(
        out,
        r#"<text x="14" y="{}" font-size="13" text-anchor="middle" transform="rotate(-90 14 {})">cross-capacity similarity</text>"#,
        SIZE / 2.0,
        SIZE / 2.0
    );
    let _ = writeln!(out, r##"<g fill="#1f4e9a" fill-opacity="0.35">"##);
    for p in report.scatter.iter().filter(|p| !p.is_focal) {
        let _ = writeln!(
            out,
            r#"<circle cx="{:.2}" cy="{:.2}" r="1.6"/>"#,
            sx(p.functional),
            sy(p.cross_capacity)
        );
    }
    let _ = writeln!(out, "</g>");
    for p in report.scatter.iter().filter(|p| p.is_focal) {
        let _ = writeln!(
            out,
            r##"<circle cx="{:.2}" cy="{:.2}" r="8" fill="#d62728" stroke="black"><title>focal {}</title></circle>"##,
            sx(p.functional),
            sy(p.cross_capacity),
            p.id
        );
    }
    out.push_str("</svg>\n");
    out
}

/// Blue at `lo` through white to red at `hi`.
pub fn diverging_color(value: f64, lo: f64, hi: f64) -> String {
    let t = if hi > lo { ((value - lo) / (hi - lo)).clamp(0.0, 1.0) } else { 0.5 };
    let (r, g, b) = if t < 0.5 {
        let s = t / 0.5;
        (
            lerp(33.0, 247.0, s),
            lerp(102.0, 247.0, s),
            lerp(172.0, 247.0, s),
        )
    } else {
        let s = (t - 0.5) / 0.5;
        (
            lerp(247.0, 178.0, s),
            lerp(247.0, 24.0, s),
            lerp(247.0, 43.0, s),
        )
    };
    format!("#{:02x}{:02x}{:02x}", r as u8, g as u8, b as u8)
}

fn lerp(a: f64, b: f64, t: f64) -> f64 {
    (a + (b - a) * t).round()
}

/// Network drawing options.
#[derive(Debug, Clone, Default)]
pub struct NetworkStyle {
    /// Node id to value; colored on a diverging scale over the value range.
    pub values: BTreeMap<usize, f64>,
    /// Nodes drawn with a heavy outline (e.g. focal-containing nodes).
    pub outlined: Vec<usize>,
    /// Nodes drawn faded (e.g. below a highlight threshold).
    pub faded: Vec<usize>,
}

/// Network positions fitted into the canvas; node radius grows with
/// `√size`.
pub fn network_svg(network: &MapperNetwork, layout: &LayoutPositions, style: &NetworkStyle) -> String {
    let positions: BTreeMap<usize, [f64; 2]> = layout
        .node_ids
        .iter()
        .copied()
        .zip(layout.positions.iter().copied())
        .collect();
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for p in positions.values() {
        x0 = x0.min(p[0]);
        x1 = x1.max(p[0]);
        y0 = y0.min(p[1]);
        y1 = y1.max(p[1]);
    }
    let span = (x1 - x0).max(y1 - y0).max(1e-12);
    let plot = SIZE - 2.0 * MARGIN;
    let place = |p: [f64; 2]| {
        [
            MARGIN + (p[0] - x0) / span * plot,
            SIZE - MARGIN - (p[1] - y0) / span * plot,
        ]
    };
    let (lo, hi) = style
        .values
        .values()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let max_size = network.nodes.iter().map(|n| n.stats.size).max().unwrap_or(1).max(1) as f64;

    let mut out = String::new();
    header(&mut out, SIZE, SIZE);
    let _ = writeln!(out, r##"<g stroke="#999" stroke-width="1">"##);
    for [u, v] in &network.edges {
        if let (Some(&a), Some(&b)) = (positions.get(u), positions.get(v)) {
            let (a, b) = (place(a), place(b));
            let _ = writeln!(
                out,
                r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}"/>"#,
                a[0], a[1], b[0], b[1]
            );
        }
    }
    let _ = writeln!(out, "</g>");
    for node in &network.nodes {
        let Some(&p) = positions.get(&node.id) else { continue };
        let c = place(p);
        let r = 3.0 + 7.0 * (node.stats.size as f64 / max_size).sqrt();
        let fill = style
            .values
            .get(&node.id)
            .map(|&v| diverging_color(v, lo, hi))
            .unwrap_or_else(|| "#bbbbbb".to_string());
        let opacity = if style.faded.contains(&node.id) { 0.25 } else { 1.0 };
        let (stroke, width) = if style.outlined.contains(&node.id) { ("black", 2.5) } else { ("#555", 0.5) };
        let _ = writeln!(
            out,
            r#"<circle cx="{:.2}" cy="{:.2}" r="{r:.2}" fill="{fill}" fill-opacity="{opacity}" stroke="{stroke}" stroke-width="{width}"><title>node {} ({} members)</title></circle>"#,
            c[0], c[1], node.id, node.stats.size
        );
    }
    out.push_str("</svg>\n");
    out
}
