//! Empirical CDFs and plot-ready summary tables.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

/// Empirical CDF: one `(value, fraction)` point per distinct input value,
/// sorted ascending, where the fraction is the share of inputs less than or
/// equal to the value. The last fraction is always 1.
pub fn cdf(values: &[f64]) -> Result<Vec<(f64, f64)>> {
    if values.is_empty() {
        return Err(Error::InvalidInput("cdf needs at least one value".into()));
    }
    if values.iter().any(|v| v.is_nan()) {
        return Err(Error::InvalidInput("cdf input contains NaN".into()));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut points = Vec::new();
    let mut i = 0usize;
    while i < sorted.len() {
        let v = sorted[i];
        let mut j = i;
        while j < sorted.len() && sorted[j] == v {
            j += 1;
        }
        points.push((v, j as f64 / n));
        i = j;
    }
    Ok(points)
}

/// Writes CDF points as `value_dbm,fraction` rows.
pub fn write_cdf_csv(points: &[(f64, f64)], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::from("value_dbm,fraction\n");
    for (v, f) in points {
        out.push_str(&format!("{v},{f}\n"));
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// One summary line per evaluated channel: deployment size, mean
/// best-gateway power, and (when a simulation ran) the average PDR.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub channel: String,
    pub objective: usize,
    pub avg_ed_best_power_dbm: f64,
    pub avg_pdr: Option<f64>,
}

/// Writes summary rows as `channel,objective,avg_ed_best_power_dbm,avg_pdr`;
/// the PDR column stays empty for rows without a simulation report.
pub fn write_summary_csv(rows: &[SummaryRow], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::from("channel,objective,avg_ed_best_power_dbm,avg_pdr\n");
    for r in rows {
        let pdr = r.avg_pdr.map(|p| p.to_string()).unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{}\n",
            r.channel, r.objective, r.avg_ed_best_power_dbm, pdr
        ));
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}
