//! Minimal self-contained SVG figures.

use std::fmt::Write;

use crate::error::{CliError, CliResult};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 78.0;
const RIGHT: f64 = 24.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 58.0;

pub struct PlotMeta<'a> {
    pub title: &'a str,
    pub config_sha256: &'a str,
    pub created_utc: &'a str,
}

#[derive(Clone, Copy)]
struct Axis {
    lo: f64,
    hi: f64,
    log: bool,
}

impl Axis {
    fn fit(values: impl Iterator<Item = f64>, log: bool) -> CliResult<Self> {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for v in values {
            let v = if log { v.log10() } else { v };
            if v.is_finite() {
                lo = lo.min(v);
                hi = hi.max(v);
            }
        }
        if !lo.is_finite() {
            return Err(CliError::Schema("nothing finite to plot".into()));
        }
        if hi - lo < 1e-12 * lo.abs().max(1.0) {
            lo -= 0.5;
            hi += 0.5;
        }
        let pad = 0.05 * (hi - lo);
        Ok(Self {
            lo: lo - pad,
            hi: hi + pad,
            log,
        })
    }

    fn frac(&self, v: f64) -> f64 {
        let v = if self.log { v.log10() } else { v };
        (v - self.lo) / (self.hi - self.lo)
    }

    fn ticks(&self) -> Vec<f64> {
        if self.log {
            let (a, b) = (self.lo.ceil() as i32, self.hi.floor() as i32);
            return (a..=b).map(|e| 10f64.powi(e)).collect();
        }
        let raw = (self.hi - self.lo) / 6.0;
        let mag = 10f64.powf(raw.log10().floor());
        let step = [1.0, 2.0, 5.0, 10.0]
            .iter()
            .map(|m| m * mag)
            .find(|s| *s >= raw)
            .unwrap_or(10.0 * mag);
        let first = (self.lo / step).ceil() as i64;
        let last = (self.hi / step).floor() as i64;
        (first..=last).map(|k| k as f64 * step).collect()
    }
}

fn label(v: f64, log: bool) -> String {
    if log {
        format!("1e{}", v.log10().round() as i32)
    } else if v == 0.0 {
        "0".into()
    } else if v.abs() >= 1e4 || v.abs() < 1e-2 {
        format!("{v:.1e}")
    } else {
        let s = format!("{v:.3}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

struct Canvas {
    out: String,
    x: Axis,
    y: Axis,
}

impl Canvas {
    fn new(meta: &PlotMeta, x: Axis, y: Axis, x_label: &str, y_label: &str) -> Self {
        let mut out = String::new();
        let _ = write!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">
<metadata>config-sha256: {}; created: {}</metadata>
<rect width="100%" height="100%" fill="white"/>
<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>
"#,
            escape(meta.config_sha256),
            escape(meta.created_utc),
            WIDTH / 2.0,
            escape(meta.title)
        );
        let mut c = Self { out, x, y };
        c.frame(x_label, y_label);
        c
    }

    fn px(&self, v: f64) -> f64 {
        LEFT + self.x.frac(v) * (WIDTH - LEFT - RIGHT)
    }

    fn py(&self, v: f64) -> f64 {
        HEIGHT - BOTTOM - self.y.frac(v) * (HEIGHT - TOP - BOTTOM)
    }

    fn frame(&mut self, x_label: &str, y_label: &str) {
        let (x0, x1, y0, y1) = (LEFT, WIDTH - RIGHT, HEIGHT - BOTTOM, TOP);
        let _ = writeln!(
            self.out,
            r#"<rect x="{x0}" y="{y1}" width="{}" height="{}" fill="none" stroke="black"/>"#,
            x1 - x0,
            y0 - y1
        );
        for t in self.x.ticks() {
            let p = self.px(t);
            let _ = writeln!(
                self.out,
                r#"<line x1="{p:.2}" y1="{y0}" x2="{p:.2}" y2="{}" stroke="black"/><text x="{p:.2}" y="{}" text-anchor="middle">{}</text>"#,
                y0 + 5.0,
                y0 + 19.0,
                label(t, self.x.log)
            );
        }
        for t in self.y.ticks() {
            let p = self.py(t);
            let _ = writeln!(
                self.out,
                r#"<line x1="{}" y1="{p:.2}" x2="{x0}" y2="{p:.2}" stroke="black"/><text x="{}" y="{:.2}" text-anchor="end">{}</text>"#,
                x0 - 5.0,
                x0 - 8.0,
                p + 4.0,
                label(t, self.y.log)
            );
        }
        let _ = writeln!(
            self.out,
            r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
            (x0 + x1) / 2.0,
            HEIGHT - 14.0,
            escape(x_label)
        );
        let _ = writeln!(
            self.out,
            r#"<text transform="translate(18 {}) rotate(-90)" text-anchor="middle">{}</text>"#,
            (y0 + y1) / 2.0,
            escape(y_label)
        );
    }

    fn dots(&mut self, pts: &[(f64, f64)], r: f64, fill: &str) {
        for &(x, y) in pts {
            let _ = writeln!(
                self.out,
                r#"<circle cx="{:.2}" cy="{:.2}" r="{r}" fill="{fill}"/>"#,
                self.px(x),
                self.py(y)
            );
        }
    }

    fn polyline(&mut self, pts: &[(f64, f64)], stroke: &str) {
        let coords: Vec<String> = pts
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", self.px(x), self.py(y)))
            .collect();
        let _ = writeln!(
            self.out,
            r#"<polyline points="{}" fill="none" stroke="{stroke}" stroke-width="1.5"/>"#,
            coords.join(" ")
        );
    }

    fn finish(mut self) -> String {
        self.out.push_str("</svg>\n");
        self.out
    }
}

fn nonempty<T>(data: &[T], what: &str) -> CliResult<()> {
    if data.is_empty() {
        Err(CliError::Schema(format!("cannot plot an empty {what}")))
    } else {
        Ok(())
    }
}

/// Pair scatter versus distance with per-distance averages and a fitted line.
pub fn distance_scatter(
    meta: &PlotMeta,
    points: &[(f64, f64)],
    averages: &[(f64, f64)],
    line: Option<(f64, f64)>,
) -> CliResult<String> {
    nonempty(points, "distance scatter")?;
    let x = Axis::fit(points.iter().map(|p| p.0).chain([0.0]), false)?;
    let y = Axis::fit(points.iter().chain(averages).map(|p| p.1), false)?;
    let mut c = Canvas::new(meta, x, y, "distance (mm)", "crosstalk (dB)");
    c.dots(points, 2.5, "#7a9cc6");
    c.dots(averages, 4.5, "#c0392b");
    if let Some((m, b)) = line {
        let (a, z) = (x.lo.max(0.0), x.hi);
        c.polyline(&[(a, m * a + b), (z, m * z + b)], "black");
    }
    Ok(c.finish())
}

/// Histogram from bin edges and counts.
pub fn histogram(
    meta: &PlotMeta,
    edges: &[f64],
    counts: &[usize],
    x_label: &str,
) -> CliResult<String> {
    nonempty(counts, "histogram")?;
    if edges.len() != counts.len() + 1 {
        return Err(CliError::Schema(
            "histogram needs one more edge than counts".into(),
        ));
    }
    let x = Axis::fit(edges.iter().copied(), false)?;
    let top = *counts.iter().max().unwrap_or(&1) as f64;
    let y = Axis {
        lo: 0.0,
        hi: 1.05 * top.max(1.0),
        log: false,
    };
    let mut c = Canvas::new(meta, x, y, x_label, "count");
    for (k, &n) in counts.iter().enumerate() {
        let (x0, x1) = (c.px(edges[k]), c.px(edges[k + 1]));
        let (y0, y1) = (c.py(0.0), c.py(n as f64));
        let _ = writeln!(
            c.out,
            r##"<rect x="{x0:.2}" y="{y1:.2}" width="{:.2}" height="{:.2}" fill="#7a9cc6" stroke="#2c3e50"/>"##,
            x1 - x0,
            y0 - y1
        );
    }
    Ok(c.finish())
}

/// Mean gate error versus qubit count on log axes.
pub fn error_vs_count(meta: &PlotMeta, points: &[(f64, f64)]) -> CliResult<String> {
    nonempty(points, "error curve")?;
    if points.iter().any(|p| !(p.0 > 0.0) || !(p.1 > 0.0)) {
        return Err(CliError::Schema(
            "error curve needs positive counts and errors".into(),
        ));
    }
    let x = Axis::fit(points.iter().map(|p| p.0), true)?;
    let y = Axis::fit(points.iter().map(|p| p.1), true)?;
    let mut c = Canvas::new(meta, x, y, "qubits", "mean gate error");
    c.polyline(points, "#2c3e50");
    c.dots(points, 4.0, "#c0392b");
    Ok(c.finish())
}

/// Heat map of `rows[i][j]` over `x[i]`, `y[j]`, drawn at most 200 x 150 cells.
pub fn heat_map(
    meta: &PlotMeta,
    x: &[f64],
    y: &[f64],
    rows: &[Vec<f64>],
    x_label: &str,
    y_label: &str,
) -> CliResult<String> {
    nonempty(x, "map")?;
    nonempty(y, "map")?;
    if rows.len() != x.len() || rows.iter().any(|r| r.len() != y.len()) {
        return Err(CliError::Schema("map rows do not match the axes".into()));
    }
    let xa = Axis::fit(x.iter().copied(), false)?;
    let ya = Axis::fit(y.iter().copied(), false)?;
    let mut c = Canvas::new(meta, xa, ya, x_label, y_label);
    let sx = x.len().div_ceil(200).max(1);
    let sy = y.len().div_ceil(150).max(1);
    let top = rows
        .iter()
        .flatten()
        .copied()
        .fold(0.0, f64::max)
        .max(1e-300);
    let cw = (WIDTH - LEFT - RIGHT) / x.len().div_ceil(sx) as f64;
    let ch = (HEIGHT - TOP - BOTTOM) / y.len().div_ceil(sy) as f64;
    for i in (0..x.len()).step_by(sx) {
        for j in (0..y.len()).step_by(sy) {
            let v = rows[i][j] / top;
            if v < 0.02 {
                continue;
            }
            let shade = (255.0 * (1.0 - v)).round() as u8;
            let _ = writeln!(
                c.out,
                r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="rgb({shade},{shade},255)"/>"#,
                c.px(x[i]) - cw / 2.0,
                c.py(y[j]) - ch / 2.0,
                cw,
                ch
            );
        }
    }
    Ok(c.finish())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn meta() -> PlotMeta<'static> {
        PlotMeta {
            title: "t",
            config_sha256: "abc",
            created_utc: "now",
        }
    }

    #[test]
    fn empty_inputs_are_rejected() {
        assert!(distance_scatter(&meta(), &[], &[], None).is_err());
        assert!(histogram(&meta(), &[0.0], &[], "x").is_err());
        assert!(error_vs_count(&meta(), &[]).is_err());
    }

    #[test]
    fn svg_carries_the_hash() {
        let s = histogram(&meta(), &[-42.0, -40.0, -38.0], &[3, 5], "dB").unwrap();
        assert!(s.starts_with("<svg") && s.ends_with("</svg>\n"));
        assert!(s.contains("config-sha256: abc"));
    }

    #[test]
    fn log_ticks_are_decades() {
        let a = Axis::fit([1e-5, 3e-3].into_iter(), true).unwrap();
        let t = a.ticks();
        assert_eq!(t.len(), 3);
        for (got, want) in t.iter().zip([1e-5, 1e-4, 1e-3]) {
            assert!((got / want - 1.0).abs() < 1e-12);
        }
    }
}
