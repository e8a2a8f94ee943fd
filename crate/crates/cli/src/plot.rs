//! Minimal static SVG charts: bars, a line and scatter series.

use std::fmt::Write;

const W: f64 = 640.0;
const H: f64 = 400.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"];

pub struct Series<'a> {
    pub name: &'a str,
    pub points: Vec<(f64, f64)>,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn new(xs: impl Iterator<Item = f64> + Clone, ys: impl Iterator<Item = f64> + Clone) -> Self {
        let span = |it: &mut dyn Iterator<Item = f64>| {
            let (lo, hi) = it.filter(|v| v.is_finite()).fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
            if !lo.is_finite() {
                (0.0, 1.0)
            } else if lo == hi {
                (lo - 0.5, hi + 0.5)
            } else {
                (lo, hi)
            }
        };
        let (x0, x1) = span(&mut xs.clone());
        let (y0, y1) = span(&mut ys.clone());
        Frame { x0, x1, y0, y1 }
    }

    fn px(&self, x: f64) -> f64 {
        LEFT + (x - self.x0) / (self.x1 - self.x0) * (W - LEFT - RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        H - BOTTOM - (y - self.y0) / (self.y1 - self.y0) * (H - TOP - BOTTOM)
    }
}

fn header(svg: &mut String, title: &str, xlabel: &str, ylabel: &str) {
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(svg, r#"<text x="{}" y="22" text-anchor="middle" font-size="15">{}</text>"#, W / 2.0, escape(title));
    let _ = writeln!(svg, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, W / 2.0, H - 12.0, escape(xlabel));
    let _ = writeln!(
        svg,
        r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">{}</text>"#,
        H / 2.0,
        H / 2.0,
        escape(ylabel)
    );
}

fn axes(svg: &mut String, f: &Frame, x_ticks: bool) {
    let (l, r, t, b) = (LEFT, W - RIGHT, TOP, H - BOTTOM);
    let _ = writeln!(svg, r#"<path d="M{l} {t} L{l} {b} L{r} {b}" fill="none" stroke="black"/>"#);
    for i in 0..=4 {
        let v = f.y0 + (f.y1 - f.y0) * i as f64 / 4.0;
        let y = f.py(v);
        let _ = writeln!(svg, r#"<text x="{}" y="{:.1}" text-anchor="end">{}</text>"#, l - 6.0, y + 4.0, tick(v));
        let _ = writeln!(svg, r##"<path d="M{l} {y:.1} L{r} {y:.1}" stroke="#dddddd"/>"##);
    }
    if x_ticks {
        for i in 0..=4 {
            let v = f.x0 + (f.x1 - f.x0) * i as f64 / 4.0;
            let _ = writeln!(svg, r#"<text x="{:.1}" y="{}" text-anchor="middle">{}</text>"#, f.px(v), b + 16.0, tick(v));
        }
    }
}

fn tick(v: f64) -> String {
    if v.abs() >= 1000.0 || v == v.trunc() {
        format!("{v:.0}")
    } else {
        format!("{v:.3}")
    }
}

/// Vertical bars, one per label; values below zero are drawn from the axis.
pub fn bar_chart(title: &str, xlabel: &str, ylabel: &str, bars: &[(String, f64)]) -> String {
    let mut svg = String::new();
    header(&mut svg, title, xlabel, ylabel);
    let f = Frame::new([0.0, 1.0].into_iter(), bars.iter().map(|b| b.1).chain([0.0]));
    axes(&mut svg, &f, false);
    let n = bars.len().max(1) as f64;
    let slot = (W - LEFT - RIGHT) / n;
    for (i, (label, v)) in bars.iter().enumerate() {
        let x = LEFT + slot * i as f64 + slot * 0.15;
        let (ya, yb) = (f.py(v.max(0.0)), f.py(v.min(0.0)));
        let _ = writeln!(
            svg,
            r#"<rect x="{x:.1}" y="{ya:.1}" width="{:.1}" height="{:.1}" fill="{}"/>"#,
            slot * 0.7,
            yb - ya,
            PALETTE[0]
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{}" text-anchor="middle" font-size="10">{}</text>"#,
            x + slot * 0.35,
            H - BOTTOM + 16.0,
            escape(label)
        );
    }
    svg.push_str("</svg>\n");
    svg
}

/// Polylines, one per series.
pub fn line_chart(title: &str, xlabel: &str, ylabel: &str, series: &[Series]) -> String {
    let mut svg = String::new();
    header(&mut svg, title, xlabel, ylabel);
    let all = series.iter().flat_map(|s| s.points.iter());
    let f = Frame::new(all.clone().map(|p| p.0), all.map(|p| p.1));
    axes(&mut svg, &f, true);
    for (i, s) in series.iter().enumerate() {
        let d: Vec<String> = s.points.iter().map(|&(x, y)| format!("{:.1},{:.1}", f.px(x), f.py(y))).collect();
        let _ = writeln!(
            svg,
            r#"<polyline points="{}" fill="none" stroke="{}" stroke-width="1.5"/>"#,
            d.join(" "),
            PALETTE[i % PALETTE.len()]
        );
    }
    legend(&mut svg, series);
    svg.push_str("</svg>\n");
    svg
}

/// Point clouds, one colour per series.
pub fn scatter(title: &str, xlabel: &str, ylabel: &str, series: &[Series]) -> String {
    let mut svg = String::new();
    header(&mut svg, title, xlabel, ylabel);
    let all = series.iter().flat_map(|s| s.points.iter());
    let f = Frame::new(all.clone().map(|p| p.0), all.map(|p| p.1));
    axes(&mut svg, &f, true);
    for (i, s) in series.iter().enumerate() {
        for &(x, y) in &s.points {
            let _ = writeln!(
                svg,
                r#"<circle cx="{:.1}" cy="{:.1}" r="3" fill="{}" fill-opacity="0.7"/>"#,
                f.px(x),
                f.py(y),
                PALETTE[i % PALETTE.len()]
            );
        }
    }
    legend(&mut svg, series);
    svg.push_str("</svg>\n");
    svg
}

fn legend(svg: &mut String, series: &[Series]) {
    for (i, s) in series.iter().enumerate() {
        let y = TOP + 14.0 * i as f64;
        let _ = writeln!(
            svg,
            r#"<rect x="{}" y="{}" width="10" height="10" fill="{}"/><text x="{}" y="{}">{}</text>"#,
            W - RIGHT - 150.0,
            y,
            PALETTE[i % PALETTE.len()],
            W - RIGHT - 135.0,
            y + 9.0,
            escape(s.name)
        );
    }
}
