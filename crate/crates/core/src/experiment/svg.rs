//! Minimal static SVG charts.

use std::fmt::Write;

use crate::attribution::BoxStats;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 170.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 55.0;
const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

#[derive(Clone, Debug, PartialEq)]
pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
    /// Half-width of a shaded band around each point.
    pub band: Option<Vec<f64>>,
    pub dashed: bool,
    /// Index into the palette.
    pub color: usize,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

struct Frame {
    x: (f64, f64),
    y: (f64, f64),
}

impl Frame {
    fn new(x: (f64, f64), y: (f64, f64)) -> Self {
        let widen = |(lo, hi): (f64, f64)| {
            if !(lo.is_finite() && hi.is_finite()) {
                (0.0, 1.0)
            } else if hi - lo < 1e-12 {
                (lo - 0.5, hi + 0.5)
            } else {
                let pad = 0.05 * (hi - lo);
                (lo - pad, hi + pad)
            }
        };
        Self {
            x: widen(x),
            y: widen(y),
        }
    }

    fn px(&self, x: f64) -> f64 {
        LEFT + (x - self.x.0) / (self.x.1 - self.x.0) * (WIDTH - LEFT - RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - BOTTOM - (y - self.y.0) / (self.y.1 - self.y.0) * (HEIGHT - TOP - BOTTOM)
    }
}

fn header(out: &mut String, title: &str, x_label: &str, y_label: &str) {
    let _ = write!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = write!(
        out,
        r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
    );
    let _ = write!(
        out,
        r#"<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>"#,
        (WIDTH - RIGHT + LEFT) / 2.0,
        escape(title)
    );
    let _ = write!(
        out,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        (WIDTH - RIGHT + LEFT) / 2.0,
        HEIGHT - 12.0,
        escape(x_label)
    );
    let _ = write!(
        out,
        r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">{}</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0,
        escape(y_label)
    );
}

fn axes(out: &mut String, f: &Frame, x_ticks: &[(f64, String)]) {
    let (x0, x1, y0, y1) = (LEFT, WIDTH - RIGHT, TOP, HEIGHT - BOTTOM);
    let _ = write!(
        out,
        r#"<path d="M{x0} {y0} L{x0} {y1} L{x1} {y1}" fill="none" stroke="black"/>"#
    );
    for i in 0..=4 {
        let v = f.y.0 + (f.y.1 - f.y.0) * i as f64 / 4.0;
        let y = f.py(v);
        let _ = write!(
            out,
            r##"<line x1="{x0}" y1="{y}" x2="{x1}" y2="{y}" stroke="#ddd"/><text x="{}" y="{}" text-anchor="end">{}</text>"##,
            x0 - 5.0,
            y + 4.0,
            format_tick(v)
        );
    }
    for (v, label) in x_ticks {
        let x = f.px(*v);
        let _ = write!(
            out,
            r#"<line x1="{x}" y1="{y1}" x2="{x}" y2="{}" stroke="black"/><text x="{x}" y="{}" text-anchor="middle">{}</text>"#,
            y1 + 4.0,
            y1 + 18.0,
            escape(label)
        );
    }
}

fn format_tick(v: f64) -> String {
    if v.abs() >= 100.0 {
        format!("{v:.0}")
    } else if v.abs() >= 1.0 {
        format!("{v:.1}")
    } else {
        format!("{v:.3}")
    }
}

fn numeric_ticks(lo: f64, hi: f64) -> Vec<(f64, String)> {
    let count = ((hi - lo).round() as usize).clamp(1, 10);
    (0..=count)
        .map(|i| {
            let v = lo + (hi - lo) * i as f64 / count as f64;
            (v, format_tick(v))
        })
        .collect()
}

/// Line chart with optional shaded bands and a legend on the right.
pub fn line_plot(title: &str, x_label: &str, y_label: &str, series: &[Series]) -> String {
    let mut xr = (f64::INFINITY, f64::NEG_INFINITY);
    let mut yr = (f64::INFINITY, f64::NEG_INFINITY);
    for s in series {
        for (i, &(x, y)) in s.points.iter().enumerate() {
            let b = s
                .band
                .as_ref()
                .and_then(|b| b.get(i))
                .copied()
                .unwrap_or(0.0);
            xr = (xr.0.min(x), xr.1.max(x));
            yr = (yr.0.min(y - b), yr.1.max(y + b));
        }
    }
    let f = Frame::new(xr, yr);
    let mut out = String::new();
    header(&mut out, title, x_label, y_label);
    let ticks = if xr.0.is_finite() {
        numeric_ticks(xr.0, xr.1)
    } else {
        Vec::new()
    };
    axes(&mut out, &f, &ticks);
    for (k, s) in series.iter().enumerate() {
        let color = PALETTE[s.color % PALETTE.len()];
        if let Some(band) = &s.band {
            let upper: Vec<String> = s
                .points
                .iter()
                .zip(band)
                .map(|(&(x, y), b)| format!("{:.2},{:.2}", f.px(x), f.py(y + b)))
                .collect();
            let lower: Vec<String> = s
                .points
                .iter()
                .zip(band)
                .rev()
                .map(|(&(x, y), b)| format!("{:.2},{:.2}", f.px(x), f.py(y - b)))
                .collect();
            if !upper.is_empty() {
                let _ = write!(
                    out,
                    r#"<polygon points="{} {}" fill="{color}" fill-opacity="0.15" stroke="none"/>"#,
                    upper.join(" "),
                    lower.join(" ")
                );
            }
        }
        let pts: Vec<String> = s
            .points
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", f.px(x), f.py(y)))
            .collect();
        let dash = if s.dashed {
            r#" stroke-dasharray="5,4""#
        } else {
            ""
        };
        let _ = write!(
            out,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2"{dash}/>"#,
            pts.join(" ")
        );
        let ly = TOP + 16.0 * k as f64 + 6.0;
        let lx = WIDTH - RIGHT + 12.0;
        let _ = write!(
            out,
            r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"{dash}/><text x="{}" y="{}">{}</text>"#,
            lx + 22.0,
            lx + 28.0,
            ly + 4.0,
            escape(&s.name)
        );
    }
    out.push_str("</svg>\n");
    out
}

/// Box-and-whisker chart, one box per label, outliers as open circles.
pub fn box_plot(title: &str, y_label: &str, boxes: &[(String, BoxStats)]) -> String {
    let mut yr = (f64::INFINITY, f64::NEG_INFINITY);
    for (_, b) in boxes {
        for v in [b.whisker_low, b.whisker_high].iter().chain(&b.outliers) {
            yr = (yr.0.min(*v), yr.1.max(*v));
        }
    }
    let n = boxes.len().max(1) as f64;
    let f = Frame::new((0.0, n + 1.0), yr);
    let mut out = String::new();
    header(&mut out, title, "feature", y_label);
    let ticks: Vec<(f64, String)> = boxes
        .iter()
        .enumerate()
        .map(|(i, (l, _))| (i as f64 + 1.0, l.clone()))
        .collect();
    axes(&mut out, &f, &ticks);
    let half = 0.3 * (f.px(1.0) - f.px(0.0));
    for (i, (_, b)) in boxes.iter().enumerate() {
        let x = f.px(i as f64 + 1.0);
        let color = PALETTE[i % PALETTE.len()];
        let _ = write!(
            out,
            r#"<line x1="{x}" y1="{}" x2="{x}" y2="{}" stroke="black"/>"#,
            f.py(b.whisker_low),
            f.py(b.whisker_high)
        );
        for w in [b.whisker_low, b.whisker_high] {
            let _ = write!(
                out,
                r#"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="black"/>"#,
                x - half / 2.0,
                f.py(w),
                x + half / 2.0,
                f.py(w)
            );
        }
        let (top, bottom) = (f.py(b.q3), f.py(b.q1));
        let _ = write!(
            out,
            r#"<rect x="{}" y="{top}" width="{}" height="{}" fill="{color}" fill-opacity="0.5" stroke="black"/>"#,
            x - half,
            2.0 * half,
            (bottom - top).max(0.5)
        );
        let _ = write!(
            out,
            r#"<line x1="{}" y1="{m}" x2="{}" y2="{m}" stroke="black" stroke-width="2"/>"#,
            x - half,
            x + half,
            m = f.py(b.median)
        );
        for o in &b.outliers {
            let _ = write!(
                out,
                r#"<circle cx="{x}" cy="{}" r="3" fill="none" stroke="black"/>"#,
                f.py(*o)
            );
        }
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn charts_are_well_formed_xml() {
        let s = vec![
            Series {
                name: "a <train>".into(),
                points: vec![(1.0, 0.5), (2.0, 0.4), (3.0, 0.35)],
                band: Some(vec![0.1, 0.05, 0.02]),
                dashed: false,
                color: 0,
            },
            Series {
                name: "b & val".into(),
                points: vec![(1.0, 0.6)],
                band: None,
                dashed: true,
                color: 1,
            },
        ];
        let line = line_plot("loss", "epoch", "BCE", &s);
        let doc = roxmltree::Document::parse(&line).unwrap();
        assert_eq!(doc.root_element().tag_name().name(), "svg");
        assert!(roxmltree::Document::parse(&line_plot("empty", "x", "y", &[])).is_ok());
        let b = BoxStats::from_values(&[1.0, 2.0, 3.0, 4.0, 20.0]).unwrap();
        let boxes = box_plot(
            "shap",
            "|φ|",
            &[("<Z>_0".into(), b.clone()), ("<Z>_1".into(), b)],
        );
        let doc = roxmltree::Document::parse(&boxes).unwrap();
        assert_eq!(
            doc.descendants()
                .filter(|n| n.has_tag_name("circle"))
                .count(),
            2
        );
    }
}
