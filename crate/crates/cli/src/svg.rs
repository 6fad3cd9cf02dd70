//! Minimal self-contained SVG charts: scatter/line plots and heat maps.

use std::fmt::Write as _;

const W: f64 = 640.0;
const H: f64 = 480.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 30.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;

pub const RED: &str = "#d62728";
pub const BLUE: &str = "#1f77b4";
pub const GREEN: &str = "#2ca02c";
pub const BLACK: &str = "#222222";

#[derive(Debug, Clone)]
pub struct Series {
    pub label: String,
    pub color: &'static str,
    pub points: Vec<(f64, f64)>,
    /// Connect points in order instead of drawing markers.
    pub line: bool,
}

impl Series {
    pub fn scatter(label: impl Into<String>, color: &'static str, points: Vec<(f64, f64)>) -> Self {
        Self { label: label.into(), color, points, line: false }
    }

    pub fn line(label: impl Into<String>, color: &'static str, points: Vec<(f64, f64)>) -> Self {
        Self { label: label.into(), color, points, line: true }
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Tick positions at 1, 2 or 5 times a power of ten.
fn ticks(lo: f64, hi: f64) -> Vec<f64> {
    let span = hi - lo;
    let raw = span / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0].iter().map(|m| m * mag).find(|s| span / s <= 6.0).unwrap_or(10.0 * mag);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    (first..=last).map(|k| k as f64 * step).collect()
}

fn tick_label(v: f64) -> String {
    let a = v.abs();
    if a == 0.0 {
        "0".into()
    } else if !(1e-3..1e4).contains(&a) {
        format!("{v:.1e}")
    } else {
        let s = format!("{v:.4}");
        s.trim_end_matches('0').trim_end_matches('.').to_owned()
    }
}

/// Padded data range; degenerate ranges are widened.
fn range(vals: impl Iterator<Item = f64>) -> (f64, f64) {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for v in vals.filter(|v| v.is_finite()) {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if !lo.is_finite() {
        return (-1.0, 1.0);
    }
    let pad = if hi > lo { 0.04 * (hi - lo) } else { 0.5 * lo.abs().max(1.0) };
    (lo - pad, hi + pad)
}

struct Frame {
    x: (f64, f64),
    y: (f64, f64),
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        LEFT + (x - self.x.0) / (self.x.1 - self.x.0) * (W - LEFT - RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        H - BOTTOM - (y - self.y.0) / (self.y.1 - self.y.0) * (H - TOP - BOTTOM)
    }
}

fn open(out: &mut String, title: &str) {
    writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\" font-family=\"sans-serif\" font-size=\"12\">"
    )
    .unwrap();
    writeln!(out, "<rect width=\"{W}\" height=\"{H}\" fill=\"white\"/>").unwrap();
    writeln!(out, "<text x=\"{}\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">{}</text>", W / 2.0, escape(title))
        .unwrap();
}

fn axes(out: &mut String, f: &Frame, xlabel: &str, ylabel: &str) {
    let (x0, x1, y0, y1) = (LEFT, W - RIGHT, TOP, H - BOTTOM);
    writeln!(
        out,
        "<rect x=\"{x0}\" y=\"{y0}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>",
        x1 - x0,
        y1 - y0
    )
    .unwrap();
    for t in ticks(f.x.0, f.x.1) {
        let px = f.px(t);
        writeln!(out, "<line x1=\"{px:.2}\" y1=\"{y1}\" x2=\"{px:.2}\" y2=\"{}\" stroke=\"black\"/>", y1 + 5.0)
            .unwrap();
        writeln!(out, "<text x=\"{px:.2}\" y=\"{}\" text-anchor=\"middle\">{}</text>", y1 + 18.0, tick_label(t))
            .unwrap();
    }
    for t in ticks(f.y.0, f.y.1) {
        let py = f.py(t);
        writeln!(out, "<line x1=\"{}\" y1=\"{py:.2}\" x2=\"{x0}\" y2=\"{py:.2}\" stroke=\"black\"/>", x0 - 5.0)
            .unwrap();
        writeln!(out, "<text x=\"{}\" y=\"{:.2}\" text-anchor=\"end\">{}</text>", x0 - 8.0, py + 4.0, tick_label(t))
            .unwrap();
    }
    writeln!(
        out,
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>",
        (x0 + x1) / 2.0,
        H - 15.0,
        escape(xlabel)
    )
    .unwrap();
    writeln!(
        out,
        "<text x=\"20\" y=\"{0}\" text-anchor=\"middle\" transform=\"rotate(-90 20 {0})\">{1}</text>",
        (y0 + y1) / 2.0,
        escape(ylabel)
    )
    .unwrap();
}

pub fn xy_plot(title: &str, xlabel: &str, ylabel: &str, series: &[Series]) -> String {
    let f = Frame {
        x: range(series.iter().flat_map(|s| s.points.iter().map(|p| p.0))),
        y: range(series.iter().flat_map(|s| s.points.iter().map(|p| p.1))),
    };
    let mut out = String::new();
    open(&mut out, title);
    axes(&mut out, &f, xlabel, ylabel);
    for s in series {
        let pts: Vec<(f64, f64)> = s.points.iter().copied().filter(|p| p.0.is_finite() && p.1.is_finite()).collect();
        if s.line {
            let path: Vec<String> = pts.iter().map(|&(x, y)| format!("{:.2},{:.2}", f.px(x), f.py(y))).collect();
            writeln!(
                out,
                "<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\" points=\"{}\"/>",
                s.color,
                path.join(" ")
            )
            .unwrap();
        } else {
            writeln!(out, "<g fill=\"{}\" fill-opacity=\"0.7\">", s.color).unwrap();
            for (x, y) in pts {
                writeln!(out, "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"2\"/>", f.px(x), f.py(y)).unwrap();
            }
            out.push_str("</g>\n");
        }
    }
    for (k, s) in series.iter().enumerate() {
        let y = TOP + 16.0 + 16.0 * k as f64;
        let x = W - RIGHT - 120.0;
        writeln!(out, "<rect x=\"{x}\" y=\"{}\" width=\"10\" height=\"10\" fill=\"{}\"/>", y - 9.0, s.color).unwrap();
        writeln!(out, "<text x=\"{}\" y=\"{y}\">{}</text>", x + 14.0, escape(&s.label)).unwrap();
    }
    out.push_str("</svg>\n");
    out
}

/// Maps `t` in [0, 1] to a dark-blue → yellow ramp.
fn color(t: f64) -> String {
    const STOPS: [(f64, f64, f64); 5] =
        [(68.0, 1.0, 84.0), (59.0, 82.0, 139.0), (33.0, 145.0, 140.0), (94.0, 201.0, 98.0), (253.0, 231.0, 37.0)];
    let t = if t.is_finite() { t.clamp(0.0, 1.0) } else { 0.0 };
    let s = t * (STOPS.len() - 1) as f64;
    let k = (s.floor() as usize).min(STOPS.len() - 2);
    let u = s - k as f64;
    let mix = |a: f64, b: f64| (a + (b - a) * u).round() as u8;
    let (a, b) = (STOPS[k], STOPS[k + 1]);
    format!("#{:02x}{:02x}{:02x}", mix(a.0, b.0), mix(a.1, b.1), mix(a.2, b.2))
}

/// `rows[i][j]` drawn at column j, row i; `x` and `y` give the value ranges
/// spanned by columns and rows. Non-finite cells are left blank.
pub fn heatmap(title: &str, xlabel: &str, ylabel: &str, rows: &[Vec<f64>], x: (f64, f64), y: (f64, f64)) -> String {
    let f = Frame { x, y };
    let (lo, hi) = {
        let r = rows.iter().flatten().copied().filter(|v| v.is_finite());
        r.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)))
    };
    let scale = if hi > lo { hi - lo } else { 1.0 };
    let mut out = String::new();
    open(&mut out, title);
    let nr = rows.len().max(1) as f64;
    let nc = rows.first().map_or(1, |r| r.len()).max(1) as f64;
    let cw = (W - LEFT - RIGHT) / nc;
    let ch = (H - TOP - BOTTOM) / nr;
    out.push_str("<g shape-rendering=\"crispEdges\">\n");
    for (i, row) in rows.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            if !v.is_finite() {
                continue;
            }
            let px = LEFT + j as f64 * cw;
            let py = H - BOTTOM - (i + 1) as f64 * ch;
            writeln!(
                out,
                "<rect x=\"{px:.2}\" y=\"{py:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"{}\"/>",
                cw + 0.05,
                ch + 0.05,
                color((v - lo) / scale)
            )
            .unwrap();
        }
    }
    out.push_str("</g>\n");
    axes(&mut out, &f, xlabel, ylabel);
    if lo.is_finite() {
        writeln!(
            out,
            "<text x=\"{}\" y=\"{}\" text-anchor=\"end\">color: {} (dark) to {} (light)</text>",
            W - RIGHT,
            H - 15.0,
            tick_label(lo),
            tick_label(hi)
        )
        .unwrap();
    }
    out.push_str("</svg>\n");
    out
}
