//! Minimal hand-written SVG: ROC polylines and a confusion heatmap.

use std::fmt::Write;

use super::format::fmt6;
use crate::metrics::AnnotatedCell;

const PALETTE: [&str; 14] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
    "#bcbd22", "#17becf", "#393b79", "#637939", "#8c6d31", "#843c39",
];

pub fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Comment-safe text: XML comments may not contain `--`.
fn comment(s: &str) -> String {
    s.replace("--", "- -")
}

/// One labelled polyline on the unit square.
pub struct Series<'a> {
    pub label: String,
    pub points: &'a [(f64, f64)],
    pub emphasis: bool,
}

/// ROC plot with a chance diagonal and a legend on the right.
pub fn roc_svg(series: &[Series], provenance: &str) -> String {
    let (left, top, size) = (50.0f64, 20.0f64, 400.0f64);
    let legend_x = left + size + 20.0;
    let height = (top + size + 50.0).max(top + 16.0 * series.len() as f64 + 20.0);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" font-family="sans-serif" font-size="11">"#,
        legend_x + 260.0,
        height
    );
    let _ = writeln!(s, "<!-- {} -->", comment(provenance));
    let _ = writeln!(
        s,
        r##"<rect x="{left}" y="{top}" width="{size}" height="{size}" fill="none" stroke="#000"/>"##
    );
    let _ = writeln!(
        s,
        r##"<line x1="{left}" y1="{}" x2="{}" y2="{top}" stroke="#999" stroke-dasharray="4 4"/>"##,
        top + size,
        left + size
    );
    for k in 0..=4 {
        let t = k as f64 / 4.0;
        let x = left + t * size;
        let y = top + size - t * size;
        let _ = writeln!(
            s,
            r#"<text x="{x}" y="{}" text-anchor="middle">{}</text>"#,
            top + size + 14.0,
            fmt6(t)
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#,
            left - 4.0,
            y + 4.0,
            fmt6(t)
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">False positive rate</text>"#,
        left + size / 2.0,
        top + size + 32.0
    );
    let _ = writeln!(
        s,
        r#"<text x="12" y="{}" text-anchor="middle" transform="rotate(-90 12 {})">True positive rate</text>"#,
        top + size / 2.0,
        top + size / 2.0
    );
    for (i, ser) in series.iter().enumerate() {
        let color = if ser.emphasis {
            "#000"
        } else {
            PALETTE[i % PALETTE.len()]
        };
        let width = if ser.emphasis { 2.5 } else { 1.2 };
        let pts: Vec<String> = ser
            .points
            .iter()
            .map(|&(fx, ty)| {
                format!(
                    "{},{}",
                    fmt6(left + fx * size),
                    fmt6(top + size - ty * size)
                )
            })
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline fill="none" stroke="{color}" stroke-width="{width}" points="{}"/>"#,
            pts.join(" ")
        );
        let ly = top + 10.0 + 16.0 * i as f64;
        let _ = writeln!(
            s,
            r#"<line x1="{legend_x}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="{width}"/>"#,
            legend_x + 18.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}">{}</text>"#,
            legend_x + 24.0,
            ly + 4.0,
            escape(&ser.label)
        );
    }
    s.push_str("</svg>\n");
    s
}

/// Row-normalized confusion heatmap; only `annotations` get value labels.
pub fn heatmap_svg(
    matrix: &[Vec<f64>],
    labels: &[&str],
    annotations: &[AnnotatedCell],
    provenance: &str,
) -> String {
    let n = matrix.len();
    let cell = 36.0f64;
    let (left, top) = (170.0f64, 20.0f64);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" font-family="sans-serif" font-size="10">"#,
        left + cell * n as f64 + 20.0,
        top + cell * n as f64 + 170.0
    );
    let _ = writeln!(s, "<!-- {} -->", comment(provenance));
    for (i, row) in matrix.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            // white to dark blue
            let v = v.clamp(0.0, 1.0);
            let r = (255.0 * (1.0 - 0.9 * v)).round() as u8;
            let g = (255.0 * (1.0 - 0.7 * v)).round() as u8;
            let _ = writeln!(
                s,
                r##"<rect x="{}" y="{}" width="{cell}" height="{cell}" fill="#{r:02x}{g:02x}ff" stroke="#ddd"/>"##,
                left + cell * j as f64,
                top + cell * i as f64
            );
        }
    }
    for a in annotations {
        let color = if a.value > 0.5 { "#fff" } else { "#000" };
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="middle" fill="{color}">{:.2}</text>"#,
            left + cell * (a.predicted_class as f64 + 0.5),
            top + cell * (a.true_class as f64 + 0.5) + 3.0,
            a.value
        );
    }
    for (i, label) in labels.iter().enumerate() {
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#,
            left - 6.0,
            top + cell * (i as f64 + 0.5) + 3.0,
            escape(label)
        );
        let x = left + cell * (i as f64 + 0.5);
        let y = top + cell * n as f64 + 8.0;
        let _ = writeln!(
            s,
            r#"<text x="{x}" y="{y}" text-anchor="end" transform="rotate(-60 {x} {y})">{}</text>"#,
            escape(label)
        );
    }
    s.push_str("</svg>\n");
    s
}
