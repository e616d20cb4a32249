//! Minimal self-contained SVG plots.

use std::fmt::Write as _;

const W: f64 = 640.0;
const H: f64 = 420.0;
const MARGIN: f64 = 48.0;

pub struct Plot {
    x: (f64, f64),
    y: (f64, f64),
    body: String,
    title: String,
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

impl Plot {
    pub fn new(title: &str, x: (f64, f64), y: (f64, f64)) -> Self {
        let widen = |(a, b): (f64, f64)| if b > a { (a, b) } else { (a - 0.5, a + 0.5) };
        Plot { x: widen(x), y: widen(y), body: String::new(), title: title.to_string() }
    }

    fn px(&self, x: f64) -> f64 {
        MARGIN + (x - self.x.0) / (self.x.1 - self.x.0) * (W - 2.0 * MARGIN)
    }

    fn py(&self, y: f64) -> f64 {
        H - MARGIN - (y - self.y.0) / (self.y.1 - self.y.0) * (H - 2.0 * MARGIN)
    }

    pub fn polyline(&mut self, points: &[(f64, f64)], color: &str, width: f64) {
        if points.is_empty() {
            return;
        }
        let mut d = String::new();
        for (k, &(x, y)) in points.iter().enumerate() {
            let _ = write!(d, "{}{:.2},{:.2}", if k == 0 { "" } else { " " }, self.px(x), self.py(y));
        }
        let _ = writeln!(self.body, r#"<polyline fill="none" stroke="{color}" stroke-width="{width}" points="{d}"/>"#);
    }

    pub fn segment(&mut self, a: (f64, f64), b: (f64, f64), color: &str, width: f64) {
        self.polyline(&[a, b], color, width);
    }

    /// Filled rectangle between data corners.
    pub fn rect(&mut self, x0: f64, x1: f64, y0: f64, y1: f64, color: &str) {
        let (l, r) = (self.px(x0), self.px(x1));
        let (t, b) = (self.py(y1), self.py(y0));
        let _ = writeln!(
            self.body,
            r#"<rect x="{l:.2}" y="{t:.2}" width="{:.2}" height="{:.2}" fill="{color}"/>"#,
            (r - l).max(0.5),
            (b - t).max(0.5)
        );
    }

    pub fn label(&mut self, x: f64, y: f64, text: &str) {
        let _ = writeln!(
            self.body,
            r#"<text x="{:.2}" y="{:.2}" font-size="11" font-family="sans-serif">{}</text>"#,
            self.px(x),
            self.py(y),
            esc(text)
        );
    }

    /// The finished document; `comment` goes right after the root element.
    pub fn render(&self, comment: &str) -> String {
        let mut s = String::new();
        let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#);
        let _ = writeln!(s, "<!-- {} -->", comment.replace("--", "- -"));
        let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
        let (x0, x1, y0, y1) = (self.px(self.x.0), self.px(self.x.1), self.py(self.y.0), self.py(self.y.1));
        let _ = writeln!(s, r#"<rect x="{x0:.2}" y="{y1:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="black"/>"#, x1 - x0, y0 - y1);
        for (v, x, anchor) in [(self.x.0, x0, "start"), (self.x.1, x1, "end")] {
            let _ = writeln!(s, r#"<text x="{x:.2}" y="{:.2}" font-size="11" font-family="sans-serif" text-anchor="{anchor}">{}</text>"#, y0 + 14.0, fmt_tick(v));
        }
        for (v, y) in [(self.y.0, y0), (self.y.1, y1)] {
            let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" font-size="11" font-family="sans-serif" text-anchor="end">{}</text>"#, x0 - 4.0, y + 4.0, fmt_tick(v));
        }
        let _ = writeln!(s, r#"<text x="{:.2}" y="20" font-size="13" font-family="sans-serif" text-anchor="middle">{}</text>"#, W / 2.0, esc(&self.title));
        s.push_str(&self.body);
        s.push_str("</svg>\n");
        s
    }
}

fn fmt_tick(v: f64) -> String {
    if v != 0.0 && (v.abs() < 1e-3 || v.abs() >= 1e5) {
        format!("{v:.2e}")
    } else {
        format!("{}", (v * 1e4).round() / 1e4)
    }
}

pub const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];
