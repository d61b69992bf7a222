//! Minimal standalone SVG charts.

use std::fmt::Write as _;

const W: f64 = 640.0;
const H: f64 = 420.0;
const MARGIN: f64 = 56.0;
const COLORS: [&str; 4] = ["#1f5fa8", "#c0392b", "#2e8b57", "#8e44ad"];

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Style {
    Line,
    Points,
    Bars,
}

#[derive(Debug, Clone)]
pub struct Series {
    pub label: String,
    pub style: Style,
    pub points: Vec<(f64, f64)>,
}

/// Shaded vertical band `[lo, hi]` with a caption.
#[derive(Debug, Clone)]
pub struct Band {
    pub label: String,
    pub lo: f64,
    pub hi: f64,
}

#[derive(Debug, Clone, Default)]
pub struct Chart {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
    pub bands: Vec<Band>,
    pub x_range: Option<(f64, f64)>,
    pub y_range: Option<(f64, f64)>,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for v in values.filter(|v| v.is_finite()) {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo <= 1e-300 {
        let pad = if lo == 0.0 { 1.0 } else { lo.abs() * 0.1 };
        return (lo - pad, hi + pad);
    }
    (lo, hi)
}

impl Chart {
    pub fn new(title: impl Into<String>, x_label: impl Into<String>, y_label: impl Into<String>) -> Self {
        Self { title: title.into(), x_label: x_label.into(), y_label: y_label.into(), ..Default::default() }
    }

    pub fn series(mut self, label: impl Into<String>, style: Style, points: Vec<(f64, f64)>) -> Self {
        self.series.push(Series { label: label.into(), style, points });
        self
    }

    pub fn band(mut self, label: impl Into<String>, lo: f64, hi: f64) -> Self {
        self.bands.push(Band { label: label.into(), lo, hi });
        self
    }

    pub fn x_range(mut self, lo: f64, hi: f64) -> Self {
        self.x_range = Some((lo, hi));
        self
    }

    pub fn y_range(mut self, lo: f64, hi: f64) -> Self {
        self.y_range = Some((lo, hi));
        self
    }

    pub fn render(&self) -> String {
        let pts = || self.series.iter().flat_map(|s| s.points.iter());
        let (x0, x1) = self.x_range.unwrap_or_else(|| range(pts().map(|p| p.0)));
        let (mut y0, y1) = self.y_range.unwrap_or_else(|| range(pts().map(|p| p.1)));
        if self.series.iter().any(|s| s.style == Style::Bars) {
            y0 = y0.min(0.0);
        }
        let (pw, ph) = (W - 2.0 * MARGIN, H - 2.0 * MARGIN);
        let sx = |x: f64| MARGIN + (x - x0) / (x1 - x0) * pw;
        let sy = |y: f64| H - MARGIN - (y - y0) / (y1 - y0) * ph;

        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
        let _ = writeln!(s, r#"<text x="{}" y="24" text-anchor="middle" font-size="15">{}</text>"#, W / 2.0, escape(&self.title));
        for (k, b) in self.bands.iter().enumerate() {
            let (a, c) = (sx(b.lo.max(x0)), sx(b.hi.min(x1)));
            if c <= a {
                continue;
            }
            let _ = writeln!(
                s,
                r##"<rect x="{a:.2}" y="{MARGIN}" width="{:.2}" height="{ph}" fill="#f0b429" fill-opacity="{:.2}"/>"##,
                c - a,
                0.12 + 0.08 * k as f64
            );
            let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" font-size="11">{}</text>"#, a + 3.0, MARGIN + 14.0 + 13.0 * k as f64, escape(&b.label));
        }
        let _ = writeln!(
            s,
            r#"<rect x="{MARGIN}" y="{MARGIN}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
        );
        for t in 0..=4 {
            let fx = x0 + (x1 - x0) * t as f64 / 4.0;
            let fy = y0 + (y1 - y0) * t as f64 / 4.0;
            let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, sx(fx), H - MARGIN + 16.0, tick(fx));
            let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#, MARGIN - 4.0, sy(fy) + 4.0, tick(fy));
        }
        let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, W / 2.0, H - 14.0, escape(&self.x_label));
        let _ = writeln!(
            s,
            r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">{}</text>"#,
            H / 2.0,
            H / 2.0,
            escape(&self.y_label)
        );
        for (k, ser) in self.series.iter().enumerate() {
            let color = COLORS[k % COLORS.len()];
            let inside: Vec<(f64, f64)> = ser.points.iter().copied().filter(|p| p.0.is_finite() && p.1.is_finite()).collect();
            match ser.style {
                Style::Line => {
                    let path: Vec<String> = inside.iter().map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
                    let _ = writeln!(s, r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#, path.join(" "));
                }
                Style::Points => {
                    let _ = writeln!(s, r#"<g fill="{color}">"#);
                    for &(x, y) in &inside {
                        let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="0.8"/>"#, sx(x), sy(y));
                    }
                    let _ = writeln!(s, "</g>");
                }
                Style::Bars => {
                    let width = if inside.len() > 1 { pw / inside.len() as f64 } else { pw / 10.0 };
                    let _ = writeln!(s, r#"<g fill="{color}">"#);
                    for &(x, y) in &inside {
                        let (top, base) = (sy(y.max(0.0)), sy(0.0f64.max(y0)));
                        let _ = writeln!(
                            s,
                            r#"<rect x="{:.2}" y="{top:.2}" width="{:.2}" height="{:.2}"/>"#,
                            sx(x) - width / 2.0,
                            (width - 1.0).max(0.5),
                            (base - top).max(0.0)
                        );
                    }
                    let _ = writeln!(s, "</g>");
                }
            }
            let _ = writeln!(
                s,
                r#"<text x="{:.2}" y="{:.2}" fill="{color}" text-anchor="end">{}</text>"#,
                W - MARGIN - 4.0,
                MARGIN + 14.0 + 14.0 * k as f64,
                escape(&ser.label)
            );
        }
        s.push_str("</svg>\n");
        s
    }
}

fn tick(v: f64) -> String {
    if v == 0.0 || (v.abs() >= 1e-3 && v.abs() < 1e4) {
        format!("{v:.3}")
    } else {
        format!("{v:.2e}")
    }
}

/// Counts of `values` in `bins` equal cells of `[0, 1)`, as bar centres.
pub fn histogram01(values: &[f64], bins: usize) -> Vec<(f64, f64)> {
    let mut counts = vec![0usize; bins];
    for &v in values {
        let k = ((v * bins as f64).floor() as isize).clamp(0, bins as isize - 1) as usize;
        counts[k] += 1;
    }
    counts.iter().enumerate().map(|(k, &c)| ((k as f64 + 0.5) / bins as f64, c as f64)).collect()
}
