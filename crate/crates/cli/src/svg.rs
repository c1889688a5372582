//! Minimal static SVG scatter plot.

use std::fmt::Write;

const SIZE: f64 = 600.0;
const MARGIN: f64 = 60.0;

const PALETTE: [&str; 10] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
    "#bcbd22", "#17becf",
];

pub struct Point {
    pub x: f64,
    pub y: f64,
    /// Colour group (author index); `None` draws in grey.
    pub group: Option<usize>,
    pub title: String,
}

pub struct Scatter {
    pub x_label: String,
    pub y_label: String,
    pub points: Vec<Point>,
    /// Drawn on top as white discs labelled with `group + 1`.
    pub centroids: Vec<Point>,
}

fn colour(group: Option<usize>) -> &'static str {
    group.map_or("#555555", |g| PALETTE[g % PALETTE.len()])
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Two decimals, without a negative zero.
fn fmt(v: f64) -> String {
    let s = format!("{v:.2}");
    if s == "-0.00" {
        "0.00".into()
    } else {
        s
    }
}

struct Axis {
    lo: f64,
    hi: f64,
}

impl Axis {
    fn of(values: impl Iterator<Item = f64>) -> Self {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for v in values {
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if !lo.is_finite() {
            return Axis { lo: -1.0, hi: 1.0 };
        }
        let pad = if hi > lo { (hi - lo) * 0.05 } else { 1.0 };
        Axis {
            lo: lo - pad,
            hi: hi + pad,
        }
    }

    fn map(&self, v: f64, from: f64, to: f64) -> f64 {
        from + (v - self.lo) / (self.hi - self.lo) * (to - from)
    }
}

pub fn render(plot: &Scatter) -> String {
    let all = || plot.points.iter().chain(&plot.centroids);
    let xa = Axis::of(all().map(|p| p.x));
    let ya = Axis::of(all().map(|p| p.y));
    let (left, right) = (MARGIN, SIZE - MARGIN / 2.0);
    let (top, bottom) = (MARGIN / 2.0, SIZE - MARGIN);
    let sx = |v: f64| fmt(xa.map(v, left, right));
    let sy = |v: f64| fmt(ya.map(v, bottom, top));

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}" font-family="sans-serif">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<rect x="{}" y="{}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        fmt(left),
        fmt(top),
        fmt(right - left),
        fmt(bottom - top)
    );
    for (v, anchor, x) in [(xa.lo, "start", left), (xa.hi, "end", right)] {
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" font-size="10" text-anchor="{anchor}">{}</text>"#,
            fmt(x),
            fmt(bottom + 14.0),
            fmt(v)
        );
    }
    for (v, y) in [(ya.lo, bottom), (ya.hi, top + 10.0)] {
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" font-size="10" text-anchor="end">{}</text>"#,
            fmt(left - 4.0),
            fmt(y),
            fmt(v)
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" font-size="14" text-anchor="middle">{}</text>"#,
        fmt((left + right) / 2.0),
        fmt(SIZE - 20.0),
        escape(&plot.x_label)
    );
    let _ = writeln!(
        s,
        r#"<text x="20" y="{y}" font-size="14" text-anchor="middle" transform="rotate(-90 20 {y})">{}</text>"#,
        escape(&plot.y_label),
        y = fmt((top + bottom) / 2.0)
    );

    let _ = writeln!(s, r#"<g class="posts">"#);
    for p in &plot.points {
        let _ = writeln!(
            s,
            r#"<circle cx="{}" cy="{}" r="3" fill="{}" fill-opacity="0.6"><title>{}</title></circle>"#,
            sx(p.x),
            sy(p.y),
            colour(p.group),
            escape(&p.title)
        );
    }
    let _ = writeln!(s, "</g>");
    let _ = writeln!(s, r#"<g class="centroids">"#);
    for c in &plot.centroids {
        let label = c.group.map_or(String::new(), |g| (g + 1).to_string());
        let _ = writeln!(
            s,
            r#"<circle cx="{x}" cy="{y}" r="9" fill="white" stroke="{}" stroke-width="2"><title>{}</title></circle>"#,
            colour(c.group),
            escape(&c.title),
            x = sx(c.x),
            y = sy(c.y)
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" font-size="9" text-anchor="middle">{label}</text>"#,
            sx(c.x),
            fmt(ya.map(c.y, bottom, top) + 3.0)
        );
    }
    let _ = writeln!(s, "</g>");
    s.push_str("</svg>\n");
    s
}
