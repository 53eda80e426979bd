//! Curve CSV. Plain `.` decimals, `\n` line ends, and `nan` wherever a
//! correlation is undefined.

use std::fmt::Write as _;
use std::path::Path;

use crate::engine::{CorrelationEstimate, CurvePoint};
use crate::error::{Error, Result};

pub const CURVE_HEADER: &str = "theta_deg,n_pairs,n_coincident,n_same,n_diff,E,rate,stderr";

/// Shortest round-trip decimal form; `nan` for missing values.
pub fn fmt_f64(v: Option<f64>) -> String {
    match v {
        Some(x) if x.is_nan() => "nan".to_string(),
        Some(x) => format!("{x}"),
        None => "nan".to_string(),
    }
}

pub fn estimate_fields(e: &CorrelationEstimate) -> String {
    format!(
        "{},{},{},{},{},{},{}",
        e.n_pairs,
        e.n_coincident,
        e.n_same,
        e.n_diff,
        fmt_f64(e.e),
        fmt_f64(e.rate),
        fmt_f64(e.stderr)
    )
}

pub fn curve_to_csv(points: &[CurvePoint]) -> Result<String> {
    if points.is_empty() {
        return Err(Error::config("cannot write an empty curve"));
    }
    let mut out = String::with_capacity(64 * (points.len() + 1));
    out.push_str(CURVE_HEADER);
    out.push('\n');
    for p in points {
        let _ = writeln!(out, "{},{}", fmt_f64(Some(p.theta)), estimate_fields(&p.estimate));
    }
    Ok(out)
}

pub fn emit_csv(path: &Path, points: &[CurvePoint]) -> Result<()> {
    super::write_file(path, &curve_to_csv(points)?)
}

fn parse_opt(field: &str) -> Result<Option<f64>> {
    if field == "nan" {
        return Ok(None);
    }
    field
        .parse::<f64>()
        .map(Some)
        .map_err(|_| Error::config(format!("bad number `{field}`")))
}

fn parse_u64(field: &str) -> Result<u64> {
    field.parse().map_err(|_| Error::config(format!("bad count `{field}`")))
}

/// Reads back what `curve_to_csv` wrote.
pub fn parse_curve_csv(text: &str) -> Result<Vec<CurvePoint>> {
    let mut lines = text.lines();
    if lines.next() != Some(CURVE_HEADER) {
        return Err(Error::config("missing or unexpected CSV header"));
    }
    lines
        .map(|line| {
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 8 {
                return Err(Error::config(format!("expected 8 fields, got {}: `{line}`", f.len())));
            }
            let theta = parse_opt(f[0])?.ok_or_else(|| Error::config("theta is nan"))?;
            Ok(CurvePoint {
                theta,
                estimate: CorrelationEstimate {
                    n_pairs: parse_u64(f[1])?,
                    n_coincident: parse_u64(f[2])?,
                    n_same: parse_u64(f[3])?,
                    n_diff: parse_u64(f[4])?,
                    e: parse_opt(f[5])?,
                    rate: parse_opt(f[6])?,
                    stderr: parse_opt(f[7])?,
                },
            })
        })
        .collect()
}
