//! Deterministic CSV, SVG and JSON emitters.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Error, Result};

/// `iteration,normalized_mse` rows.
pub fn trajectory_csv(trajectory: &[f64]) -> String {
    let mut s = String::from("iteration,normalized_mse\n");
    for (i, v) in trajectory.iter().enumerate() {
        let _ = writeln!(s, "{i},{v:e}");
    }
    s
}

/// One column per series, padded with empty cells where a series ended.
pub fn series_csv(labels: &[String], series: &[Vec<f64>]) -> String {
    let mut s = String::from("iteration");
    for l in labels {
        s.push(',');
        s.push_str(l);
    }
    s.push('\n');
    let rows = series.iter().map(Vec::len).max().unwrap_or(0);
    for i in 0..rows {
        let _ = write!(s, "{i}");
        for col in series {
            s.push(',');
            if let Some(v) = col.get(i) {
                let _ = write!(s, "{v:e}");
            }
        }
        s.push('\n');
    }
    s
}

pub struct Curve {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

/// Line plot with axes, min/max tick labels and a legend. With `log_y` the
/// y values are plotted as `log10`; non-positive values are dropped.
pub fn svg_plot(title: &str, x_label: &str, y_label: &str, curves: &[Curve], log_y: bool) -> String {
    let (w, h) = (640.0, 420.0);
    let (left, right, top, bottom) = (70.0, 160.0, 40.0, 50.0);
    let tf = |y: f64| if log_y { y.log10() } else { y };
    let pts: Vec<Vec<(f64, f64)>> = curves
        .iter()
        .map(|c| c.points.iter().filter(|p| !log_y || p.1 > 0.0).map(|&(x, y)| (x, tf(y))).filter(|p| p.1.is_finite()).collect())
        .collect();
    let all = pts.iter().flatten();
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in all {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if !x0.is_finite() {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    if x1 <= x0 {
        x1 = x0 + 1.0;
    }
    if y1 <= y0 {
        y1 = y0 + 1.0;
    }
    let pw = w - left - right;
    let ph = h - top - bottom;
    let sx = |x: f64| left + (x - x0) / (x1 - x0) * pw;
    let sy = |y: f64| top + (y1 - y) / (y1 - y0) * ph;

    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#);
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="24" font-size="15" text-anchor="middle">{}</text>"#, left + pw / 2.0, esc(title));
    let _ = writeln!(
        s,
        r#"<path d="M{left} {top} L{left} {yb} L{xr} {yb}" stroke="black" fill="none"/>"#,
        yb = top + ph,
        xr = left + pw
    );
    let fmt_y = |y: f64| if log_y { format!("1e{y:.1}") } else { format!("{y:.3e}") };
    for (y, anchor_y) in [(y0, top + ph), (y1, top)] {
        let _ = writeln!(s, r#"<text x="{}" y="{}" font-size="11" text-anchor="end">{}</text>"#, left - 6.0, anchor_y + 4.0, fmt_y(y));
    }
    for (x, ax) in [(x0, left), (x1, left + pw)] {
        let _ = writeln!(s, r#"<text x="{ax}" y="{}" font-size="11" text-anchor="middle">{x}</text>"#, top + ph + 16.0);
    }
    let _ = writeln!(s, r#"<text x="{}" y="{}" font-size="12" text-anchor="middle">{}</text>"#, left + pw / 2.0, h - 10.0, esc(x_label));
    let _ = writeln!(
        s,
        r#"<text x="16" y="{yc}" font-size="12" text-anchor="middle" transform="rotate(-90 16 {yc})">{}</text>"#,
        esc(y_label),
        yc = top + ph / 2.0
    );
    for (i, (c, p)) in curves.iter().zip(&pts).enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        if !p.is_empty() {
            let coords: Vec<String> = p.iter().map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
            let _ = writeln!(s, r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#, coords.join(" "));
        }
        let ly = top + 14.0 + 18.0 * i as f64;
        let lx = left + pw + 12.0;
        let _ = writeln!(s, r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/>"#, lx + 20.0);
        let _ = writeln!(s, r#"<text x="{}" y="{}" font-size="11">{}</text>"#, lx + 26.0, ly + 4.0, esc(&c.label));
    }
    s.push_str("</svg>\n");
    s
}

fn esc(t: &str) -> String {
    t.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| Error::Io(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

/// Writes `contents` to `dir/name`, creating `dir` if needed.
pub fn write_file(dir: &Path, name: &str, contents: &str) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join(name);
    fs::write(&path, contents)?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_trajectory_is_header_only() {
        assert_eq!(trajectory_csv(&[]), "iteration,normalized_mse\n");
    }

    #[test]
    fn csv_rows() {
        assert_eq!(trajectory_csv(&[1.0, 0.5]), "iteration,normalized_mse\n0,1e0\n1,5e-1\n");
        let s = series_csv(&["a".into(), "b".into()], &[vec![1.0, 2.0], vec![3.0]]);
        assert_eq!(s, "iteration,a,b\n0,1e0,3e0\n1,2e0,\n");
    }

    #[test]
    fn two_curves_one_svg() {
        let curves = vec![
            Curve { label: "slater".into(), points: vec![(0.0, 1.0), (1.0, 0.5)] },
            Curve { label: "jastrow".into(), points: vec![(0.0, 1.0), (1.0, 0.1)] },
        ];
        let a = svg_plot("mse", "iteration", "normalized mse", &curves, true);
        assert_eq!(a.matches("<polyline").count(), 2);
        assert!(a.contains(">slater<") && a.contains(">jastrow<"));
        assert_eq!(a, svg_plot("mse", "iteration", "normalized mse", &curves, true));
    }
}
