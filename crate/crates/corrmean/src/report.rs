//! CSV emission for task metrics and sweep results. Numbers print in
//! scientific notation with a literal decimal point, so output bytes do
//! not depend on locale, thread count, or platform.

use std::io::Write;

use crate::error::{Error, Result};
use crate::tasks::sweep::SweepPoint;
use crate::types::RoundMetrics;

fn fmt(value: f64) -> String {
    format!("{value:e}")
}

/// Writes `round,task_loss,est_mse,r2_over_r1[,extra...]` with one row
/// per round. Extra column names come from the first row and must match
/// on every row.
pub fn write_metrics_csv<W: Write>(mut out: W, rows: &[RoundMetrics]) -> Result<()> {
    let extra_names: Vec<&str> = rows
        .first()
        .map(|row| row.extra.iter().map(|(name, _)| name.as_str()).collect())
        .unwrap_or_default();
    write!(out, "round,task_loss,est_mse,r2_over_r1")?;
    for name in &extra_names {
        write!(out, ",{name}")?;
    }
    writeln!(out)?;
    for row in rows {
        let names: Vec<&str> = row.extra.iter().map(|(name, _)| name.as_str()).collect();
        if names != extra_names {
            return Err(Error::Data(format!(
                "round {} extra columns {names:?} do not match header {extra_names:?}",
                row.round
            )));
        }
        write!(
            out,
            "{},{},{},{}",
            row.round,
            fmt(row.task_loss),
            fmt(row.est_mse),
            fmt(row.r2_over_r1)
        )?;
        for (_, value) in &row.extra {
            write!(out, ",{}", fmt(*value))?;
        }
        writeln!(out)?;
    }
    Ok(())
}

/// Writes `config_index,rho,estimator,mse_hat,stderr`; an undefined
/// standard error (single trial) prints as "unavailable".
pub fn write_sweep_csv<W: Write>(mut out: W, points: &[SweepPoint]) -> Result<()> {
    writeln!(out, "config_index,rho,estimator,mse_hat,stderr")?;
    for p in points {
        let stderr = if p.stderr.is_nan() {
            "unavailable".to_string()
        } else {
            fmt(p.stderr)
        };
        writeln!(
            out,
            "{},{},{},{},{stderr}",
            p.config_index,
            fmt(p.rho),
            p.estimator,
            fmt(p.mse_hat)
        )?;
    }
    Ok(())
}
