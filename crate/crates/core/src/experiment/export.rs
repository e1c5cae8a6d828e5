//! CSV results table and the SVG stop-distance plot.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write;

use serde::{Deserialize, Serialize};

use super::{CellResult, ExperimentError};

pub const CSV_HEADER: [&str; 10] = [
    "speed",
    "n_vehicles",
    "t_perception",
    "a",
    "latency_used",
    "loss_used",
    "collision_prob",
    "ci_halfwidth",
    "mean_stop_distance",
    "violates_range",
];

const SIG_DIGITS: usize = 9;

/// One parsed row of the results table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExportRow {
    pub speed: f64,
    pub n_vehicles: u32,
    pub t_perception: f64,
    pub a: f64,
    pub latency_used: f64,
    pub loss_used: f64,
    pub collision_prob: f64,
    pub ci_halfwidth: f64,
    pub mean_stop_distance: f64,
    pub violates_range: bool,
}

/// `%.*g`-style formatting: `sig` significant digits, trailing zeros dropped.
pub fn format_sig(x: f64, sig: usize) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{:.*e}", sig - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    let negative = mantissa.starts_with('-');
    let digits: String = mantissa.chars().filter(char::is_ascii_digit).collect();
    let sign = if negative { "-" } else { "" };
    if exp < -5 || exp >= sig as i32 {
        let (head, tail) = digits.split_at(1);
        let tail = tail.trim_end_matches('0');
        return if tail.is_empty() { format!("{sign}{head}e{exp}") } else { format!("{sign}{head}.{tail}e{exp}") };
    }
    let (int_part, frac_part) = if exp >= 0 {
        let split = exp as usize + 1;
        (digits[..split].to_string(), digits[split..].to_string())
    } else {
        ("0".to_string(), format!("{}{}", "0".repeat((-exp - 1) as usize), digits))
    };
    let frac = frac_part.trim_end_matches('0');
    if frac.is_empty() {
        format!("{sign}{int_part}")
    } else {
        format!("{sign}{int_part}.{frac}")
    }
}

fn row_of(cell: &CellResult) -> ExportRow {
    ExportRow {
        speed: cell.coords.speed,
        n_vehicles: cell.coords.n_vehicles,
        t_perception: cell.coords.t_perception,
        a: cell.coords.a,
        latency_used: cell.latency_used,
        loss_used: cell.loss_used,
        collision_prob: cell.estimate.collision_probability,
        ci_halfwidth: cell.estimate.ci_halfwidth,
        mean_stop_distance: cell.estimate.mean_stop_distance,
        violates_range: cell.violates_range,
    }
}

fn render_rows(rows: &[ExportRow]) -> String {
    let mut out = CSV_HEADER.join(",");
    out.push('\n');
    let g = |x: f64| format_sig(x, SIG_DIGITS);
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            g(r.speed),
            r.n_vehicles,
            g(r.t_perception),
            g(r.a),
            g(r.latency_used),
            g(r.loss_used),
            g(r.collision_prob),
            g(r.ci_halfwidth),
            g(r.mean_stop_distance),
            r.violates_range
        );
    }
    out
}

/// Renders rows already parsed from a table, byte-identical to the original export.
pub fn render_parsed(rows: &[ExportRow]) -> String {
    render_rows(rows)
}

/// Writes the results table and returns the number of bytes written.
pub fn export_results<W: Write>(results: &[CellResult], mut out: W) -> Result<usize, ExperimentError> {
    if results.is_empty() {
        return Err(ExperimentError::Table("no results to export".into()));
    }
    let rows: Vec<ExportRow> = results.iter().map(row_of).collect();
    let text = render_rows(&rows);
    out.write_all(text.as_bytes())?;
    out.flush()?;
    Ok(text.len())
}

pub fn parse_results(text: &str) -> Result<Vec<ExportRow>, ExperimentError> {
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let header: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    if header != CSV_HEADER {
        return Err(ExperimentError::Table(format!("unexpected header {header:?}")));
    }
    Ok(reader.deserialize().collect::<Result<_, _>>()?)
}

const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#e377c2"];

/// Mean stop distance against speed, one line per (vehicle count,
/// perception time, deceleration), with a dashed marker at `d`.
pub fn write_plot<W: Write>(results: &[CellResult], d: f64, mut out: W) -> Result<(), ExperimentError> {
    let (w, h) = (800.0_f64, 500.0_f64);
    let (left, right, top, bottom) = (70.0, 170.0, 30.0, 60.0);
    let mut series: BTreeMap<(u32, u64, u64), Vec<(f64, f64)>> = BTreeMap::new();
    for c in results {
        series
            .entry((c.coords.n_vehicles, c.coords.t_perception.to_bits(), c.coords.a.to_bits()))
            .or_default()
            .push((c.coords.speed, c.estimate.mean_stop_distance));
    }
    let xs = results.iter().map(|c| c.coords.speed);
    let (x_min, x_max) = xs.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| (lo.min(x), hi.max(x)));
    let y_max = results.iter().map(|c| c.estimate.mean_stop_distance).fold(d, f64::max) * 1.05;
    let (x_min, x_max) = if x_min < x_max { (x_min, x_max) } else { (x_min - 1.0, x_min + 1.0) };
    let px = |x: f64| left + (x - x_min) / (x_max - x_min) * (w - left - right);
    let py = |y: f64| h - bottom - y / y_max * (h - top - bottom);

    let mut svg = String::new();
    let _ = writeln!(svg, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#);
    let _ = writeln!(svg, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<line x1="{l}" y1="{b}" x2="{r}" y2="{b}" stroke="black"/><line x1="{l}" y1="{t}" x2="{l}" y2="{b}" stroke="black"/>"#,
        l = left,
        r = w - right,
        t = top,
        b = h - bottom
    );
    for i in 0..=5 {
        let yv = y_max * i as f64 / 5.0;
        let _ = writeln!(svg, r#"<text x="{}" y="{:.1}" text-anchor="end">{:.0}</text>"#, left - 6.0, py(yv) + 4.0, yv);
        let xv = x_min + (x_max - x_min) * i as f64 / 5.0;
        let _ = writeln!(svg, r#"<text x="{:.1}" y="{}" text-anchor="middle">{:.1}</text>"#, px(xv), h - bottom + 18.0, xv);
    }
    let _ = writeln!(svg, r#"<text x="{:.1}" y="{}" text-anchor="middle">speed (m/s)</text>"#, (left + w - right) / 2.0, h - 15.0);
    let _ = writeln!(svg, r#"<text x="18" y="{:.1}" text-anchor="middle" transform="rotate(-90 18 {:.1})">mean stop distance (m)</text>"#, h / 2.0, h / 2.0);
    let _ = writeln!(
        svg,
        r#"<line x1="{}" y1="{y:.1}" x2="{}" y2="{y:.1}" stroke="gray" stroke-dasharray="6 4"/><text x="{}" y="{:.1}" fill="gray">d = {} m</text>"#,
        left,
        w - right,
        w - right + 4.0,
        py(d) + 4.0,
        format_sig(d, 6),
        y = py(d)
    );
    for (i, ((n, tp, a), pts)) in series.iter_mut().enumerate() {
        pts.sort_by(|p, q| p.0.total_cmp(&q.0));
        let color = PALETTE[i % PALETTE.len()];
        let path: Vec<String> = pts.iter().map(|(x, y)| format!("{:.2},{:.2}", px(*x), py(*y))).collect();
        let _ = writeln!(svg, r#"<polyline fill="none" stroke="{color}" stroke-width="2" points="{}"/>"#, path.join(" "));
        for (x, y) in pts.iter() {
            let _ = writeln!(svg, r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{color}"/>"#, px(*x), py(*y));
        }
        let ly = top + 16.0 * i as f64;
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{:.1}" fill="{color}">n={n} tp={} a={}</text>"#,
            w - right + 10.0,
            ly + 30.0,
            format_sig(f64::from_bits(*tp), 4),
            format_sig(f64::from_bits(*a), 4)
        );
    }
    svg.push_str("</svg>\n");
    out.write_all(svg.as_bytes())?;
    out.flush()?;
    Ok(())
}
