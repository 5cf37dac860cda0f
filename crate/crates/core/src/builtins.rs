//! Named target functions and sampled targets read from CSV.

use std::path::Path;
use std::sync::Arc;

use thiserror::Error;

use crate::approx1d::Eval1;

pub const MIN_SAMPLE_ROWS: usize = 1000;

#[derive(Debug, Error)]
pub enum BuiltinError {
    #[error("unknown function `{0}` (expected one of: {})", NAMES_1D.join(", "))]
    Unknown(String),
    #[error("{path}: {detail}")]
    Samples { path: String, detail: String },
}

pub const NAMES_1D: [&str; 6] = ["x", "x2", "sin", "sin3", "sin8", "osc"];

pub fn function_1d(name: &str) -> Result<Eval1, BuiltinError> {
    Ok(match name {
        "x" => Arc::new(|x| x),
        "x2" => Arc::new(|x| x * x),
        "sin" => Arc::new(f64::sin),
        "sin3" => Arc::new(|x| (3.0 * x).sin()),
        "sin8" => Arc::new(|x| 0.6 * (8.0 * x).sin()),
        "osc" => Arc::new(|x| 0.6 * (8.0 * x).sin() + 0.4 * (16.0 * x).sin()),
        other => return Err(BuiltinError::Unknown(other.into())),
    })
}

/// Piecewise-linear interpolant through sorted samples, constant beyond the ends.
pub fn interpolant(mut pts: Vec<(f64, f64)>) -> Eval1 {
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    Arc::new(move |x| {
        let i = pts.partition_point(|p| p.0 <= x);
        if i == 0 {
            return pts[0].1;
        }
        if i == pts.len() {
            return pts[pts.len() - 1].1;
        }
        let (x0, y0) = pts[i - 1];
        let (x1, y1) = pts[i];
        if x1 == x0 {
            y1
        } else {
            y0 + (y1 - y0) * (x - x0) / (x1 - x0)
        }
    })
}

/// Two-column `x,f(x)` CSV with at least 10³ rows; a non-numeric first row is a header.
/// Returns the interpolant and the sampled interval.
pub fn load_samples(path: &Path) -> Result<(Eval1, f64, f64), BuiltinError> {
    let err = |detail: String| BuiltinError::Samples { path: path.display().to_string(), detail };
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| err(e.to_string()))?;
    let mut pts = Vec::new();
    for (line, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| err(e.to_string()))?;
        if rec.len() != 2 {
            return Err(err(format!("row {} has {} columns, expected 2", line + 1, rec.len())));
        }
        match (rec[0].parse::<f64>(), rec[1].parse::<f64>()) {
            (Ok(x), Ok(y)) if x.is_finite() && y.is_finite() => pts.push((x, y)),
            _ if line == 0 => continue,
            _ => return Err(err(format!("row {} is not a pair of finite numbers", line + 1))),
        }
    }
    if pts.len() < MIN_SAMPLE_ROWS {
        return Err(err(format!("{} rows, at least {MIN_SAMPLE_ROWS} required", pts.len())));
    }
    let a = pts.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let b = pts.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
    Ok((interpolant(pts), a, b))
}

/// A builtin name, or a path to a sample file.
pub fn resolve_1d(source: &str) -> Result<(Eval1, Option<(f64, f64)>), BuiltinError> {
    match function_1d(source) {
        Ok(f) => Ok((f, None)),
        Err(unknown) => {
            let path = Path::new(source);
            if path.exists() {
                let (f, a, b) = load_samples(path)?;
                Ok((f, Some((a, b))))
            } else {
                Err(unknown)
            }
        }
    }
}
