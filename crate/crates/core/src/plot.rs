//! Deterministic SVG output.
//!
//! Coordinates are printed with a fixed number of decimals and nothing
//! depends on the clock or on hash order, so identical inputs give
//! byte-identical files.

use std::fmt::Write as _;

use crate::rearrange::StepFunction;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 56.0;
const TICKS: usize = 4;
const COLORS: [&str; 4] = ["#1f5fa8", "#c2452d", "#2e8b57", "#7a4fa0"];

/// A line series for [`line_chart_svg`].
#[derive(Clone, Debug)]
pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
}

fn fmt_coord(v: f64) -> String {
    format!("{v:.3}")
}

/// Tick labels: integers without decimals, otherwise up to four decimals
/// with trailing zeros dropped.
fn fmt_label(v: f64) -> String {
    if v == v.trunc() && v.abs() < 1e15 {
        return format!("{}", v as i64);
    }
    let s = format!("{v:.4}");
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

struct Frame {
    x_max: f64,
    y_min: f64,
    y_max: f64,
    x_min: f64,
}

impl Frame {
    fn x(&self, v: f64) -> f64 {
        MARGIN + (v - self.x_min) / (self.x_max - self.x_min) * (WIDTH - 2.0 * MARGIN)
    }

    fn y(&self, v: f64) -> f64 {
        HEIGHT - MARGIN - (v - self.y_min) / (self.y_max - self.y_min) * (HEIGHT - 2.0 * MARGIN)
    }
}

fn header(out: &mut String, title: &str) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{}" height="{}" viewBox="0 0 {} {}">"#,
        WIDTH, HEIGHT, WIDTH, HEIGHT
    );
    let _ = writeln!(
        out,
        r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
    );
    let _ = writeln!(
        out,
        r#"<text x="{}" y="24" text-anchor="middle" font-family="monospace" font-size="14">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
}

fn axes(out: &mut String, frame: &Frame, x_label: &str, y_label: &str) {
    let (x0, y0) = (frame.x(frame.x_min), frame.y(frame.y_min));
    let (x1, y1) = (frame.x(frame.x_max), frame.y(frame.y_max));
    let _ = writeln!(out, r#"<g class="axes" stroke="black" stroke-width="1">"#);
    let _ = writeln!(
        out,
        r#"<line x1="{}" y1="{}" x2="{}" y2="{}"/>"#,
        fmt_coord(x0),
        fmt_coord(y0),
        fmt_coord(x1),
        fmt_coord(y0)
    );
    let _ = writeln!(
        out,
        r#"<line x1="{}" y1="{}" x2="{}" y2="{}"/>"#,
        fmt_coord(x0),
        fmt_coord(y0),
        fmt_coord(x0),
        fmt_coord(y1)
    );
    let _ = writeln!(out, "</g>");
    let _ = writeln!(out, r#"<g class="ticks" font-family="monospace" font-size="11">"#);
    for i in 0..=TICKS {
        let frac = i as f64 / TICKS as f64;
        let xv = frame.x_min + frac * (frame.x_max - frame.x_min);
        let yv = frame.y_min + frac * (frame.y_max - frame.y_min);
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
            fmt_coord(frame.x(xv)),
            fmt_coord(y0 + 16.0),
            fmt_label(xv)
        );
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#,
            fmt_coord(x0 - 6.0),
            fmt_coord(frame.y(yv) + 4.0),
            fmt_label(yv)
        );
    }
    let _ = writeln!(out, "</g>");
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" text-anchor="middle" font-family="monospace" font-size="12">{}</text>"#,
        fmt_coord(WIDTH / 2.0),
        fmt_coord(HEIGHT - 12.0),
        escape(x_label)
    );
    let _ = writeln!(
        out,
        r#"<text x="14" y="{}" text-anchor="middle" font-family="monospace" font-size="12" transform="rotate(-90 14 {})">{}</text>"#,
        fmt_coord(HEIGHT / 2.0),
        fmt_coord(HEIGHT / 2.0),
        escape(y_label)
    );
}

/// Step plot of a nonincreasing step function on `[0, support_end]`.
///
/// Each piece `[t_i, t_{i+1})` is a horizontal segment with a filled dot at
/// its left end and an open dot at its right end. Segments carry
/// `data-start`, `data-end` and `data-level` attributes with the exact values.
pub fn step_svg(sf: &StepFunction, title: &str) -> String {
    let mut out = String::new();
    header(&mut out, title);
    let end = sf.support_end();
    let top = sf.levels().first().copied().unwrap_or(0.0);
    let frame = Frame {
        x_min: 0.0,
        x_max: if end > 0.0 { end } else { 1.0 },
        y_min: 0.0,
        y_max: if top > 0.0 { top } else { 1.0 },
    };
    axes(&mut out, &frame, "t", "f*(t)");
    let _ = writeln!(out, r#"<g class="steps" stroke="{}" stroke-width="2">"#, COLORS[0]);
    for (a, b, v) in sf.pieces() {
        let _ = writeln!(
            out,
            r#"<line x1="{}" y1="{}" x2="{}" y2="{}" data-start="{}" data-end="{}" data-level="{}"/>"#,
            fmt_coord(frame.x(a)),
            fmt_coord(frame.y(v)),
            fmt_coord(frame.x(b)),
            fmt_coord(frame.y(v)),
            a,
            b,
            v
        );
    }
    let _ = writeln!(out, "</g>");
    let _ = writeln!(out, r#"<g class="markers" stroke="{}" stroke-width="1.5">"#, COLORS[0]);
    for (a, b, v) in sf.pieces() {
        let y = fmt_coord(frame.y(v));
        let _ = writeln!(
            out,
            r#"<circle cx="{}" cy="{y}" r="3" fill="{}"/>"#,
            fmt_coord(frame.x(a)),
            COLORS[0]
        );
        let _ = writeln!(
            out,
            r#"<circle cx="{}" cy="{y}" r="3" fill="white"/>"#,
            fmt_coord(frame.x(b))
        );
    }
    let _ = writeln!(out, "</g>");
    out.push_str("</svg>\n");
    out
}

/// Line chart with one polyline and legend entry per series.
pub fn line_chart_svg(series: &[Series], title: &str, x_label: &str, y_label: &str) -> String {
    let points = || series.iter().flat_map(|s| s.points.iter().copied());
    let (mut x_min, mut x_max) = points().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (x, _)| {
        (lo.min(x), hi.max(x))
    });
    let mut y_max = points().fold(0.0_f64, |hi, (_, y)| hi.max(y));
    if !x_min.is_finite() {
        (x_min, x_max) = (0.0, 1.0);
    }
    if x_max <= x_min {
        x_max = x_min + 1.0;
    }
    if y_max <= 0.0 {
        y_max = 1.0;
    }
    let frame = Frame {
        x_min,
        x_max,
        y_min: 0.0,
        y_max,
    };
    let mut out = String::new();
    header(&mut out, title);
    axes(&mut out, &frame, x_label, y_label);
    for (i, s) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let path: Vec<String> = s
            .points
            .iter()
            .map(|&(x, y)| format!("{},{}", fmt_coord(frame.x(x)), fmt_coord(frame.y(y))))
            .collect();
        let _ = writeln!(
            out,
            r#"<polyline class="series" fill="none" stroke="{color}" stroke-width="2" points="{}"/>"#,
            path.join(" ")
        );
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" font-family="monospace" font-size="11" fill="{color}">{}</text>"#,
            fmt_coord(WIDTH - MARGIN - 140.0),
            fmt_coord(MARGIN + 14.0 * i as f64),
            escape(&s.name)
        );
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn segments(svg: &str) -> Vec<(String, String, String)> {
        let attr = |line: &str, key: &str| {
            let start = line.find(&format!("{key}=\"")).unwrap() + key.len() + 2;
            let len = line[start..].find('"').unwrap();
            line[start..start + len].to_string()
        };
        svg.lines()
            .filter(|l| l.contains("data-level"))
            .map(|l| (attr(l, "data-start"), attr(l, "data-end"), attr(l, "data-level")))
            .collect()
    }

    #[test]
    fn zero_function_has_axes_only() {
        let svg = step_svg(&StepFunction::zero(), "zero");
        assert!(svg.contains(r#"class="axes""#));
        assert!(segments(&svg).is_empty());
    }

    #[test]
    fn single_level() {
        let sf = StepFunction::new(vec![0.0, 2.5], vec![1.5]).unwrap();
        let svg = step_svg(&sf, "one");
        assert_eq!(segments(&svg), vec![("0".into(), "2.5".into(), "1.5".into())]);
        assert_eq!(svg.matches("<circle").count(), 2);
    }

    #[test]
    fn three_segments_and_stable_bytes() {
        let sf = StepFunction::new(vec![0.0, 1.0, 2.0, 4.0], vec![3.0, 2.0, 1.0]).unwrap();
        let svg = step_svg(&sf, "f*");
        let expected: Vec<(String, String, String)> = [("0", "1", "3"), ("1", "2", "2"), ("2", "4", "1")]
            .iter()
            .map(|(a, b, c)| (a.to_string(), b.to_string(), c.to_string()))
            .collect();
        assert_eq!(segments(&svg), expected);
        assert_eq!(svg, step_svg(&sf, "f*"));
    }

    #[test]
    fn labels() {
        assert_eq!(fmt_label(3.0), "3");
        assert_eq!(fmt_label(0.25), "0.25");
        assert_eq!(fmt_label(1.0 / 3.0), "0.3333");
        assert_eq!(escape("a<b"), "a&lt;b");
    }

    #[test]
    fn empty_chart() {
        let svg = line_chart_svg(&[], "empty", "L", "k");
        assert!(svg.starts_with("<svg"));
        assert!(svg.ends_with("</svg>\n"));
    }
}
