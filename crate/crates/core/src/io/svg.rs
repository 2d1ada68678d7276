//! Scan and map overlay as a standalone SVG document.

use std::fmt::Write;

use crate::geometry::{Point2, PolylineMap};
use crate::scan::Scan;

#[derive(Debug, Clone, PartialEq)]
pub struct SvgStyle {
    /// Width of the image in pixels; the height follows the aspect ratio.
    pub width: f64,
    /// Blank border, in meters.
    pub margin: f64,
    pub draw_rays: bool,
    pub ray_color: String,
    pub endpoint_color: String,
    pub map_color: String,
}

impl Default for SvgStyle {
    fn default() -> Self {
        Self {
            width: 800.0,
            margin: 0.5,
            draw_rays: true,
            ray_color: "#c8d2dc".into(),
            endpoint_color: "#1f4e79".into(),
            map_color: "#c0392b".into(),
        }
    }
}

/// Draws the rays and endpoints of `scan` under the polylines of `map`.
///
/// Max-range rays are drawn dashed and have no endpoint marker. The view
/// covers the reflected endpoints, the sensor and the map.
pub fn render_svg(scan: &Scan, map: &PolylineMap, style: &SvgStyle) -> String {
    let pts: Vec<Point2> = scan
        .reflected()
        .map(|(_, r)| r.end())
        .chain(scan.rays().iter().map(|r| r.start()))
        .chain(map.vertices())
        .collect();
    let (mut lo, mut hi) = (Point2::new(-1.0, -1.0), Point2::new(1.0, 1.0));
    if let Some(&first) = pts.first() {
        (lo, hi) = (first, first);
        for p in &pts {
            lo = Point2::new(lo.x.min(p.x), lo.y.min(p.y));
            hi = Point2::new(hi.x.max(p.x), hi.y.max(p.y));
        }
    }
    let m = style.margin;
    let (w_m, h_m) = ((hi.x - lo.x) + 2.0 * m, (hi.y - lo.y) + 2.0 * m);
    let scale = style.width / w_m.max(1e-9);
    let height = h_m * scale;
    // Map frame y points up, SVG y points down.
    let px = |p: Point2| ((p.x - lo.x + m) * scale, (hi.y - p.y + m) * scale);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{:.0}" height="{:.0}" viewBox="0 0 {:.3} {:.3}">"#,
        style.width, height, style.width, height
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    if style.draw_rays {
        let _ = writeln!(s, r#"<g stroke="{}" stroke-width="0.5">"#, style.ray_color);
        for r in scan.rays() {
            let end = if r.is_max_range() {
                r.point_at(r.range().min(w_m.max(h_m)))
            } else {
                r.end()
            };
            let (a, b) = (px(r.start()), px(end));
            let dash = if r.is_max_range() { r#" stroke-dasharray="3,3""# } else { "" };
            let _ = writeln!(
                s,
                r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}"{dash}/>"#,
                a.0, a.1, b.0, b.1
            );
        }
        let _ = writeln!(s, "</g>");
    }
    let _ = writeln!(s, r#"<g fill="{}">"#, style.endpoint_color);
    for (_, r) in scan.reflected() {
        let (x, y) = px(r.end());
        let _ = writeln!(s, r#"<circle cx="{x:.2}" cy="{y:.2}" r="1.5"/>"#);
    }
    let _ = writeln!(s, "</g>");
    let _ = writeln!(
        s,
        r#"<g fill="none" stroke="{0}" stroke-width="2" stroke-linejoin="round">"#,
        style.map_color
    );
    for line in map.polylines() {
        let coords: Vec<String> = line
            .vertices()
            .iter()
            .map(|&p| {
                let (x, y) = px(p);
                format!("{x:.2},{y:.2}")
            })
            .collect();
        let tag = if line.is_closed() { "polygon" } else { "polyline" };
        let _ = writeln!(s, r#"<{tag} points="{}"/>"#, coords.join(" "));
    }
    let _ = writeln!(s, "</g>");
    let _ = writeln!(s, r#"<g fill="{}">"#, style.map_color);
    for p in map.vertices() {
        let (x, y) = px(p);
        let _ = writeln!(s, r#"<rect x="{:.2}" y="{:.2}" width="5" height="5"/>"#, x - 2.5, y - 2.5);
    }
    let _ = writeln!(s, "</g>\n</svg>");
    s
}
