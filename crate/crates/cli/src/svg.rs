//! Static SVG scatter and polyline plots with a viewport fitted to the data.

use std::fmt::Write as _;

pub const SIZE: f64 = 800.0;
const MARGIN: f64 = 40.0;

pub const DARK: &str = "#1f1f1f";
pub const LIGHT: &str = "#b8b8b8";
pub const ACCENT: &str = "#c0392b";

/// Maps data coordinates into the square canvas, y pointing up.
#[derive(Clone, Copy, Debug)]
pub struct Viewport {
    x0: f64,
    y0: f64,
    scale: f64,
}

impl Viewport {
    /// Fit all finite points, keeping the aspect ratio; degenerate extents get a unit box.
    pub fn fit(points: impl IntoIterator<Item = (f64, f64)>) -> Self {
        let (mut lo, mut hi) = ((f64::INFINITY, f64::INFINITY), (f64::NEG_INFINITY, f64::NEG_INFINITY));
        for (x, y) in points.into_iter().filter(|(x, y)| x.is_finite() && y.is_finite()) {
            lo = (lo.0.min(x), lo.1.min(y));
            hi = (hi.0.max(x), hi.1.max(y));
        }
        if !lo.0.is_finite() {
            lo = (0.0, 0.0);
            hi = (0.0, 0.0);
        }
        let span = (hi.0 - lo.0).max(hi.1 - lo.1);
        let span = if span < 1e-9 { 1.0 } else { 1.05 * span };
        let (cx, cy) = ((lo.0 + hi.0) / 2.0, (lo.1 + hi.1) / 2.0);
        Viewport { x0: cx - span / 2.0, y0: cy - span / 2.0, scale: (SIZE - 2.0 * MARGIN) / span }
    }

    pub fn map(&self, x: f64, y: f64) -> (f64, f64) {
        (MARGIN + (x - self.x0) * self.scale, SIZE - MARGIN - (y - self.y0) * self.scale)
    }
}

pub struct Canvas {
    body: String,
    pub view: Viewport,
}

impl Canvas {
    pub fn new(view: Viewport) -> Self {
        Canvas { body: String::new(), view }
    }

    pub fn dot(&mut self, x: f64, y: f64, r: f64, fill: &str) {
        if !(x.is_finite() && y.is_finite()) {
            return;
        }
        let (px, py) = self.view.map(x, y);
        let _ = writeln!(self.body, r#"<circle cx="{px:.3}" cy="{py:.3}" r="{r}" fill="{fill}"/>"#);
    }

    pub fn polyline(&mut self, pts: &[(f64, f64)], stroke: &str, closed: bool) {
        let mut d = String::new();
        for &(x, y) in pts {
            let (px, py) = self.view.map(x, y);
            let _ = write!(d, "{px:.3},{py:.3} ");
        }
        let tag = if closed { "polygon" } else { "polyline" };
        let _ = writeln!(self.body, r#"<{tag} points="{}" fill="none" stroke="{stroke}" stroke-width="1.2"/>"#, d.trim_end());
    }

    pub fn finish(self, title: &str, x_label: &str, y_label: &str) -> String {
        let mut out = String::new();
        let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
        let _ = writeln!(out, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#);
        let _ = writeln!(out, "<title>{}</title>", escape(title));
        let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
        out.push_str(&self.body);
        let _ = writeln!(out, r#"<text x="{}" y="{}" font-size="14" text-anchor="middle">{}</text>"#, SIZE / 2.0, SIZE - 10.0, escape(x_label));
        let _ = writeln!(out, r#"<text x="14" y="{}" font-size="14" text-anchor="middle" transform="rotate(-90 14 {})">{}</text>"#, SIZE / 2.0, SIZE / 2.0, escape(y_label));
        out.push_str("</svg>\n");
        out
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
