//! Minimal line plots over θ ∈ [0°, 180°].

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    /// `(theta_deg, value)`; non-finite values are skipped.
    pub points: Vec<(f64, f64)>,
}

impl Series {
    pub fn new(label: impl Into<String>, points: Vec<(f64, f64)>) -> Self {
        Self {
            label: label.into(),
            points,
        }
    }
}

const WIDTH: f64 = 760.0;
const HEIGHT: f64 = 440.0;
const LEFT: f64 = 60.0;
const RIGHT: f64 = 190.0;
const TOP: f64 = 36.0;
const BOTTOM: f64 = 50.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

/// Maps data coordinates onto the plot area.
#[derive(Debug, Clone, Copy)]
pub struct Frame {
    pub y_min: f64,
    pub y_max: f64,
}

impl Frame {
    /// `[0, 1]` when every value is non-negative, `[-1, 1]` otherwise.
    pub fn for_series(series: &[Series]) -> Self {
        let negative = series
            .iter()
            .flat_map(|s| &s.points)
            .any(|&(_, v)| v.is_finite() && v < 0.0);
        if negative {
            Frame { y_min: -1.0, y_max: 1.0 }
        } else {
            Frame { y_min: 0.0, y_max: 1.0 }
        }
    }

    pub fn x(&self, theta: f64) -> f64 {
        LEFT + theta / 180.0 * (WIDTH - LEFT - RIGHT)
    }

    pub fn y(&self, v: f64) -> f64 {
        TOP + (self.y_max - v) / (self.y_max - self.y_min) * (HEIGHT - TOP - BOTTOM)
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

pub fn render_svg(title: &str, series: &[Series]) -> Result<String> {
    if series.is_empty() || series.iter().any(|s| s.points.is_empty()) {
        return Err(Error::EmptySeries);
    }
    let frame = Frame::for_series(series);
    let (x0, x1) = (frame.x(0.0), frame.x(180.0));
    let (y0, y1) = (frame.y(frame.y_min), frame.y(frame.y_max));

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(out, r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{}</text>"#, (x0 + x1) / 2.0, escape(title));

    // axes and ticks
    let _ = writeln!(out, r#"<g stroke="black" stroke-width="1" fill="none">"#);
    let _ = writeln!(out, r#"<rect x="{x0}" y="{y1}" width="{}" height="{}"/>"#, x1 - x0, y0 - y1);
    if frame.y_min < 0.0 {
        let yz = frame.y(0.0);
        let _ = writeln!(out, r##"<line x1="{x0}" y1="{yz}" x2="{x1}" y2="{yz}" stroke="#bbb"/>"##);
    }
    for t in [0.0, 45.0, 90.0, 135.0, 180.0] {
        let x = frame.x(t);
        let _ = writeln!(out, r#"<line x1="{x}" y1="{y0}" x2="{x}" y2="{}"/>"#, y0 + 5.0);
    }
    let y_ticks: &[f64] = if frame.y_min < 0.0 { &[-1.0, -0.5, 0.0, 0.5, 1.0] } else { &[0.0, 0.25, 0.5, 0.75, 1.0] };
    for &v in y_ticks {
        let y = frame.y(v);
        let _ = writeln!(out, r#"<line x1="{}" y1="{y}" x2="{x0}" y2="{y}"/>"#, x0 - 5.0);
    }
    out.push_str("</g>\n");
    for t in [0.0, 45.0, 90.0, 135.0, 180.0] {
        let _ = writeln!(out, r#"<text x="{}" y="{}" text-anchor="middle">{t}</text>"#, frame.x(t), y0 + 18.0);
    }
    for &v in y_ticks {
        let _ = writeln!(out, r#"<text x="{}" y="{}" text-anchor="end">{v}</text>"#, x0 - 8.0, frame.y(v) + 4.0);
    }
    let _ = writeln!(out, r#"<text x="{}" y="{}" text-anchor="middle">θ (degrees)</text>"#, (x0 + x1) / 2.0, HEIGHT - 10.0);

    for (k, s) in series.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let pts: Vec<String> = s
            .points
            .iter()
            .filter(|(t, v)| t.is_finite() && v.is_finite())
            .map(|&(t, v)| format!("{},{}", frame.x(t), frame.y(v)))
            .collect();
        let _ = writeln!(
            out,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
            pts.join(" ")
        );
        let ly = TOP + 16.0 + 20.0 * k as f64;
        let lx = x1 + 15.0;
        let _ = writeln!(out, r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/>"#, lx + 20.0);
        let _ = writeln!(out, r#"<text x="{}" y="{}">{}</text>"#, lx + 26.0, ly + 4.0, escape(&s.label));
    }
    out.push_str("</svg>\n");
    Ok(out)
}

pub fn emit_svg(path: &Path, title: &str, series: &[Series]) -> Result<()> {
    super::write_file(path, &render_svg(title, series)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn polyline_points(svg: &str) -> Vec<Vec<(f64, f64)>> {
        svg.lines()
            .filter(|l| l.starts_with("<polyline"))
            .map(|l| {
                let start = l.find("points=\"").unwrap() + 8;
                let end = l[start..].find('"').unwrap() + start;
                l[start..end]
                    .split(' ')
                    .map(|p| {
                        let (x, y) = p.split_once(',').unwrap();
                        (x.parse().unwrap(), y.parse().unwrap())
                    })
                    .collect()
            })
            .collect()
    }

    #[test]
    fn linear_series_stays_affine() {
        let line: Vec<_> = (0..=180).map(|k| (k as f64, 2.0 * k as f64 / 180.0 - 1.0)).collect();
        let svg = render_svg("line", &[Series::new("linear", line)]).unwrap();
        let pts = &polyline_points(&svg)[0];
        assert_eq!(pts.len(), 181);
        let (xa, ya) = pts[0];
        let (xb, yb) = pts[180];
        let slope = (yb - ya) / (xb - xa);
        for &(x, y) in pts {
            assert!((ya + slope * (x - xa) - y).abs() < 1e-9);
        }
    }

    #[test]
    fn qm_series_has_181_points_and_three_overlay() {
        let qm: Vec<_> = (0..=180).map(|k| (k as f64, -(k as f64).to_radians().cos())).collect();
        let svg = render_svg(
            "claim",
            &[Series::new("oracle", qm.clone()), Series::new("mc", qm.clone()), Series::new("-cos θ", qm)],
        )
        .unwrap();
        let lines = polyline_points(&svg);
        assert_eq!(lines.len(), 3);
        assert!(lines.iter().all(|l| l.len() == 181));
        assert!(svg.contains("-cos θ"));
    }

    #[test]
    fn deterministic_and_rejects_empty() {
        let s = [Series::new("a", vec![(0.0, 0.5), (90.0, 0.25)])];
        assert_eq!(render_svg("t", &s).unwrap(), render_svg("t", &s).unwrap());
        assert!(matches!(render_svg("t", &[]), Err(Error::EmptySeries)));
        assert!(matches!(render_svg("t", &[Series::new("e", vec![])]), Err(Error::EmptySeries)));
    }

    #[test]
    fn nan_points_are_skipped_and_labels_escaped() {
        let svg = render_svg("a<b", &[Series::new("x&y", vec![(0.0, f64::NAN), (10.0, 0.5)])]).unwrap();
        assert_eq!(polyline_points(&svg)[0].len(), 1);
        assert!(svg.contains("a&lt;b"));
        assert!(svg.contains("x&amp;y"));
    }
}
