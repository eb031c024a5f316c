//! Plot data and static charts from a simulation report CSV.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::{bail, Context, Result};

pub struct Series {
    pub epochs: Vec<usize>,
    pub explored_pct: Vec<f64>,
    /// Energy drawn by the whole fleet up to each epoch.
    pub energy_j: Vec<f64>,
}

pub fn read_report(path: &Path) -> Result<Series> {
    let mut rdr = csv::Reader::from_path(path).with_context(|| format!("cannot read report {}", path.display()))?;
    let headers = rdr.headers()?.clone();
    let col = |name: &str| headers.iter().position(|h| h == name);
    let (Some(epoch), Some(explored)) = (col("epoch"), col("explored_pct")) else {
        bail!("{} is not a simulation report (missing epoch/explored_pct)", path.display());
    };
    let battery: Vec<usize> = headers
        .iter()
        .enumerate()
        .filter(|(_, h)| h.starts_with('r') && h.ends_with("_battery_J"))
        .map(|(i, _)| i)
        .collect();

    let mut s = Series {
        epochs: Vec::new(),
        explored_pct: Vec::new(),
        energy_j: Vec::new(),
    };
    let mut initial: Option<Vec<f64>> = None;
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let num = |i: usize| -> Result<f64> {
            rec[i]
                .parse::<f64>()
                .with_context(|| format!("row {}: bad number {:?}", line + 2, &rec[i]))
        };
        let levels: Vec<f64> = battery.iter().map(|&i| num(i)).collect::<Result<_>>()?;
        let start = initial.get_or_insert_with(|| levels.clone());
        s.epochs.push(num(epoch)? as usize);
        s.explored_pct.push(num(explored)?);
        s.energy_j.push(start.iter().zip(&levels).map(|(a, b)| a - b).sum());
    }
    if s.epochs.is_empty() {
        bail!("{} has no rows", path.display());
    }
    Ok(s)
}

/// Minimal SVG line chart with axis labels and min/max ticks.
pub fn line_chart(title: &str, x_label: &str, y_label: &str, points: &[(f64, f64)]) -> String {
    const W: f64 = 640.0;
    const H: f64 = 400.0;
    const M: f64 = 60.0;
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, 0.0f64, f64::NEG_INFINITY);
    for &(x, y) in points {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if !(x1 > x0) {
        x1 = x0 + 1.0;
    }
    if !(y1 > y0) {
        y1 = y0 + 1.0;
    }
    let sx = |x: f64| M + (x - x0) / (x1 - x0) * (W - 2.0 * M);
    let sy = |y: f64| H - M - (y - y0) / (y1 - y0) * (H - 2.0 * M);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(svg, r#"<text x="{}" y="24" text-anchor="middle" font-size="15">{title}</text>"#, W / 2.0);
    let _ = writeln!(
        svg,
        r#"<path d="M{M} {} L{M} {} L{} {}" fill="none" stroke="black"/>"#,
        M,
        H - M,
        W - M,
        H - M
    );
    let _ = writeln!(svg, r#"<text x="{}" y="{}" text-anchor="middle">{x_label}</text>"#, W / 2.0, H - 15.0);
    let _ = writeln!(
        svg,
        r#"<text x="15" y="{}" text-anchor="middle" transform="rotate(-90 15 {})">{y_label}</text>"#,
        H / 2.0,
        H / 2.0
    );
    for (v, x) in [(x0, sx(x0)), (x1, sx(x1))] {
        let _ = writeln!(svg, r#"<text x="{x:.1}" y="{}" text-anchor="middle">{}</text>"#, H - M + 16.0, tick(v));
    }
    for (v, y) in [(y0, sy(y0)), (y1, sy(y1))] {
        let _ = writeln!(svg, r#"<text x="{}" y="{y:.1}" text-anchor="end">{}</text>"#, M - 6.0, tick(v));
    }
    let pts: Vec<String> = points.iter().map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
    let _ = writeln!(
        svg,
        r##"<polyline points="{}" fill="none" stroke="#1f77b4" stroke-width="2"/>"##,
        pts.join(" ")
    );
    svg.push_str("</svg>\n");
    svg
}

fn tick(v: f64) -> String {
    if v.fract() == 0.0 {
        format!("{v:.0}")
    } else {
        format!("{v:.1}")
    }
}
