//! Minimal hand-written SVG output.

use std::fmt::Write;

use super::grid::CellResult;
use crate::world::TrajectoryRecord;

const CELL_PX: f64 = 40.0;
const MARGIN: f64 = 40.0;

/// Linear blend from dark blue (0) to yellow (1).
pub fn color(rate: f64) -> String {
    let t = rate.clamp(0.0, 1.0);
    let lerp = |a: f64, b: f64| (a + (b - a) * t).round() as u8;
    format!(
        "#{:02x}{:02x}{:02x}",
        lerp(68.0, 253.0),
        lerp(1.0, 231.0),
        lerp(84.0, 37.0)
    )
}

/// Circle per grid cell colored by success rate; the dolly sits above row 0.
/// Invalid cells are drawn as grey crosses.
pub fn heatmap(cells: &[&CellResult], side: usize, title: &str) -> String {
    let size = side as f64 * CELL_PX + 2.0 * MARGIN;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{h}" viewBox="0 0 {size} {h}">"#,
        h = size + CELL_PX
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="20" font-family="sans-serif" font-size="14" text-anchor="middle">{title}</text>"#,
        size / 2.0
    );
    let dolly_x = MARGIN + side as f64 * CELL_PX / 2.0;
    let _ = writeln!(
        s,
        r#"<text x="{dolly_x}" y="{}" font-family="sans-serif" font-size="16" text-anchor="middle">D</text>"#,
        MARGIN + 10.0
    );
    for c in cells {
        let cx = MARGIN + (c.col as f64 + 0.5) * CELL_PX;
        let cy = MARGIN + CELL_PX + (c.row as f64 + 0.5) * CELL_PX;
        if c.valid {
            let _ = writeln!(
                s,
                r#"<circle cx="{cx}" cy="{cy}" r="{}" fill="{}"><title>{:.3}</title></circle>"#,
                CELL_PX * 0.4,
                color(c.success_rate),
                c.success_rate
            );
        } else {
            let d = CELL_PX * 0.3;
            let _ = writeln!(
                s,
                r#"<path d="M{} {} L{} {} M{} {} L{} {}" stroke="grey" stroke-width="2"/>"#,
                cx - d,
                cy - d,
                cx + d,
                cy + d,
                cx - d,
                cy + d,
                cx + d,
                cy - d
            );
        }
    }
    s.push_str("</svg>\n");
    s
}

/// Path of a recorded episode, scaled to fit with north up.
pub fn trajectory(records: &[TrajectoryRecord]) -> String {
    let (mut x0, mut x1, mut y0, mut y1) = (
        f64::INFINITY,
        f64::NEG_INFINITY,
        f64::INFINITY,
        f64::NEG_INFINITY,
    );
    for r in records {
        x0 = x0.min(r.x);
        x1 = x1.max(r.x);
        y0 = y0.min(r.y);
        y1 = y1.max(r.y);
    }
    if records.is_empty() {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    let span = (x1 - x0).max(y1 - y0).max(1.0);
    let scale = 400.0 / span;
    let px = |x: f64| MARGIN + (x - x0) * scale;
    let py = |y: f64| MARGIN + (y1 - y) * scale;
    let w = 2.0 * MARGIN + (x1 - x0) * scale;
    let h = 2.0 * MARGIN + (y1 - y0) * scale;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w:.1}" height="{h:.1}">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let pts: Vec<String> = records
        .iter()
        .map(|r| format!("{:.2},{:.2}", px(r.x), py(r.y)))
        .collect();
    let _ = writeln!(
        s,
        r#"<polyline points="{}" fill="none" stroke="steelblue" stroke-width="2"/>"#,
        pts.join(" ")
    );
    if let (Some(a), Some(b)) = (records.first(), records.last()) {
        let _ = writeln!(
            s,
            r#"<circle cx="{:.2}" cy="{:.2}" r="5" fill="green"/>"#,
            px(a.x),
            py(a.y)
        );
        let end = if b.flags.goal { "gold" } else { "red" };
        let _ = writeln!(
            s,
            r#"<circle cx="{:.2}" cy="{:.2}" r="5" fill="{end}"/>"#,
            px(b.x),
            py(b.y)
        );
    }
    s.push_str("</svg>\n");
    s
}
