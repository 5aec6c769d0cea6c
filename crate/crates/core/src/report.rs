//! Deterministic report emission: CSV with a fixed column order and
//! 17-significant-digit floats, and a dependency-free SVG line plot.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::Result;

/// Render a float with enough digits to round-trip exactly.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// Simple CSV builder; columns are fixed at construction so row order
/// and width are stable across runs.
pub struct Csv {
    columns: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Csv {
    pub fn new(columns: &[&str]) -> Self {
        Csv { columns: columns.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, cells: Vec<String>) {
        assert_eq!(cells.len(), self.columns.len(), "CSV row width mismatch");
        self.rows.push(cells);
    }

    pub fn to_string(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_string())?;
        Ok(())
    }
}

/// Emit a log-log-friendly polyline plot of (x, y) series. Pure string
/// assembly, no display dependencies.
pub fn svg_lines(series: &[(&str, Vec<(f64, f64)>)], title: &str) -> String {
    let (w, h, pad) = (640.0, 420.0, 50.0);
    let mut pts: Vec<(f64, f64)> = Vec::new();
    for (_, s) in series {
        pts.extend(s.iter().copied());
    }
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in &pts {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if !x0.is_finite() || x1 <= x0 {
        x0 = 0.0;
        x1 = 1.0;
    }
    if !y0.is_finite() || y1 <= y0 {
        y0 = 0.0;
        y1 = 1.0;
    }
    let sx = |x: f64| pad + (x - x0) / (x1 - x0) * (w - 2.0 * pad);
    let sy = |y: f64| h - pad - (y - y0) / (y1 - y0) * (h - 2.0 * pad);
    let palette = ["#1b6ca8", "#c0392b", "#27803b", "#8e44ad", "#b7791f", "#16697a"];
    let mut svg = String::new();
    let _ = write!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n\
         <rect width=\"{w}\" height=\"{h}\" fill=\"white\"/>\n\
         <text x=\"{}\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"15\">{title}</text>\n",
        w / 2.0
    );
    let _ = write!(
        svg,
        "<line x1=\"{pad}\" y1=\"{0}\" x2=\"{1}\" y2=\"{0}\" stroke=\"#444\"/>\n\
         <line x1=\"{pad}\" y1=\"{pad}\" x2=\"{pad}\" y2=\"{0}\" stroke=\"#444\"/>\n",
        h - pad,
        w - pad
    );
    for (k, (name, s)) in series.iter().enumerate() {
        if s.is_empty() {
            continue;
        }
        let color = palette[k % palette.len()];
        let path: Vec<String> = s.iter().map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
        let _ = write!(
            svg,
            "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.8\" points=\"{}\"/>\n",
            path.join(" ")
        );
        let _ = write!(
            svg,
            "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\" fill=\"{color}\">{name}</text>\n",
            w - pad + 4.0,
            18.0 * (k as f64 + 2.0)
        );
    }
    svg.push_str("</svg>\n");
    svg
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip_through_the_format() {
        for x in [1.0 / 3.0, 2.0_f64.sqrt(), -1.234e-17, 0.0] {
            let s = fmt_float(x);
            assert_eq!(s.parse::<f64>().unwrap(), x, "{s}");
        }
    }

    #[test]
    fn csv_layout_is_stable() {
        let mut c = Csv::new(&["n", "err"]);
        c.push(vec!["25".into(), fmt_float(0.5)]);
        c.push(vec!["50".into(), fmt_float(0.125)]);
        let text = c.to_string();
        assert!(text.starts_with("n,err\n25,"));
        assert_eq!(text.lines().count(), 3);
    }

    #[test]
    #[should_panic(expected = "width mismatch")]
    fn csv_rejects_ragged_rows() {
        let mut c = Csv::new(&["a", "b"]);
        c.push(vec!["1".into()]);
    }

    #[test]
    fn svg_is_well_formed_enough() {
        let svg = svg_lines(&[("err", vec![(1.0, 1.0), (2.0, 0.5), (3.0, 0.25)])], "study");
        assert!(svg.starts_with("<svg"));
        assert!(svg.contains("polyline"));
        assert!(svg.trim_end().ends_with("</svg>"));
    }
}
