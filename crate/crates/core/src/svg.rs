//! Deterministic SVG line charts of sweep results.

use crate::error::{Error, Result};
use std::fmt::Write;

/// One row of a sweep CSV as far as plotting is concerned.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlotRow {
    pub rho: Option<f64>,
    pub n: usize,
    pub estimate: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum XAxis {
    /// one series per rho
    N,
    /// one series per n
    Rho,
}

impl XAxis {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "n" => Ok(XAxis::N),
            "rho" => Ok(XAxis::Rho),
            _ => Err(Error::Invalid(format!("x axis must be n or rho, got {s:?}"))),
        }
    }
}

/// Reads the rows of a CSV written by the experiment runner. Lines
/// starting with `#` are skipped.
pub fn parse_sweep_csv(text: &str) -> Result<Vec<PlotRow>> {
    let mut lines = text.lines().filter(|l| !l.starts_with('#') && !l.trim().is_empty());
    let header: Vec<&str> = lines.next().ok_or(Error::Empty("csv"))?.split(',').collect();
    let col = |name: &str| {
        header
            .iter()
            .position(|h| *h == name)
            .ok_or_else(|| Error::Invalid(format!("csv has no {name} column")))
    };
    let (ir, in_, ie, is) = (col("rho")?, col("n")?, col("estimate")?, col("stderr")?);
    let bad = |l: &str| Error::Invalid(format!("bad csv row {l:?}"));
    lines
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            if f.len() != header.len() {
                return Err(bad(l));
            }
            let rho = if f[ir].is_empty() {
                None
            } else {
                Some(f[ir].parse().map_err(|_| bad(l))?)
            };
            Ok(PlotRow {
                rho,
                n: f[in_].parse().map_err(|_| bad(l))?,
                estimate: f[ie].parse().map_err(|_| bad(l))?,
                stderr: f[is].parse().map_err(|_| bad(l))?,
            })
        })
        .collect()
}

struct Series {
    label: String,
    points: Vec<(f64, f64, f64)>,
}

fn group(rows: &[PlotRow], axis: XAxis) -> Vec<Series> {
    let mut out: Vec<Series> = Vec::new();
    for r in rows {
        let (label, x) = match axis {
            XAxis::N => (
                r.rho.map_or_else(|| "rho=-".to_string(), |v| format!("rho={v}")),
                r.n as f64,
            ),
            XAxis::Rho => (format!("n={}", r.n), r.rho.unwrap_or(f64::NAN)),
        };
        if !x.is_finite() {
            continue;
        }
        match out.iter_mut().find(|s| s.label == label) {
            Some(s) => s.points.push((x, r.estimate, r.stderr)),
            None => out.push(Series {
                label,
                points: vec![(x, r.estimate, r.stderr)],
            }),
        }
    }
    for s in &mut out {
        s.points.sort_by(|a, b| a.0.total_cmp(&b.0));
    }
    out
}

const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf"];
const W: f64 = 640.0;
const H: f64 = 420.0;
const LEFT: f64 = 60.0;
const RIGHT: f64 = 130.0;
const TOP: f64 = 20.0;
const BOTTOM: f64 = 50.0;

/// Line chart of `estimate` against `n` or `rho` with +-1 stderr bars.
/// The y axis is fixed to `[0, 1]`.
pub fn render_svg(rows: &[PlotRow], axis: XAxis) -> Result<String> {
    let series = group(rows, axis);
    if series.is_empty() {
        return Err(Error::Empty("plot input"));
    }
    let xs = series.iter().flat_map(|s| s.points.iter().map(|p| p.0));
    let (mut x0, mut x1) = xs.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| (lo.min(x), hi.max(x)));
    if x0 == x1 {
        x0 -= 0.5;
        x1 += 0.5;
    }
    let pw = W - LEFT - RIGHT;
    let ph = H - TOP - BOTTOM;
    let sx = |x: f64| LEFT + (x - x0) / (x1 - x0) * pw;
    let sy = |y: f64| TOP + (1.0 - y.clamp(0.0, 1.0)) * ph;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    );
    for i in 0..=5 {
        let y = i as f64 / 5.0;
        let _ = writeln!(
            s,
            r##"<line x1="{LEFT}" y1="{py:.2}" x2="{x2}" y2="{py:.2}" stroke="#ddd"/><text x="{tx}" y="{ty:.2}" text-anchor="end">{y:.1}</text>"##,
            py = sy(y),
            x2 = LEFT + pw,
            tx = LEFT - 6.0,
            ty = sy(y) + 4.0
        );
    }
    for i in 0..=4 {
        let x = x0 + (x1 - x0) * i as f64 / 4.0;
        let label = match axis {
            XAxis::N => format!("{}", x.round()),
            XAxis::Rho => format!("{x:.3}"),
        };
        let _ = writeln!(
            s,
            r#"<text x="{px:.2}" y="{py}" text-anchor="middle">{label}</text>"#,
            px = sx(x),
            py = TOP + ph + 16.0
        );
    }
    let xlabel = match axis {
        XAxis::N => "n",
        XAxis::Rho => "rho",
    };
    let _ = writeln!(
        s,
        r#"<text x="{px}" y="{py}" text-anchor="middle">{xlabel}</text>"#,
        px = LEFT + pw / 2.0,
        py = H - 12.0
    );
    let _ = writeln!(
        s,
        r#"<text x="14" y="{py}" text-anchor="middle" transform="rotate(-90 14 {py})">estimate</text>"#,
        py = TOP + ph / 2.0
    );
    for (k, ser) in series.iter().enumerate() {
        let colour = PALETTE[k % PALETTE.len()];
        let pts: Vec<String> = ser.points.iter().map(|p| format!("{:.2},{:.2}", sx(p.0), sy(p.1))).collect();
        let _ = writeln!(
            s,
            r#"<polyline fill="none" stroke="{colour}" stroke-width="1.5" points="{}"/>"#,
            pts.join(" ")
        );
        for &(x, y, e) in &ser.points {
            let _ = writeln!(
                s,
                r#"<line x1="{px:.2}" y1="{a:.2}" x2="{px:.2}" y2="{b:.2}" stroke="{colour}"/><circle cx="{px:.2}" cy="{py:.2}" r="2.5" fill="{colour}"/>"#,
                px = sx(x),
                py = sy(y),
                a = sy(y - e),
                b = sy(y + e)
            );
        }
        let ly = TOP + 14.0 + 16.0 * k as f64;
        let _ = writeln!(
            s,
            r#"<line x1="{a}" y1="{ly}" x2="{b}" y2="{ly}" stroke="{colour}" stroke-width="2"/><text x="{t}" y="{ty}">{}</text>"#,
            ser.label,
            a = W - RIGHT + 10.0,
            b = W - RIGHT + 30.0,
            t = W - RIGHT + 36.0,
            ty = ly + 4.0
        );
    }
    s.push_str("</svg>\n");
    Ok(s)
}
