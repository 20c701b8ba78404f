//! JSON and CSV emission.

use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::strategy::{ResultReport, SuiteSummary};

pub fn write_json<T: Serialize>(value: &T, path: impl AsRef<Path>) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::Io(e.to_string()))?;
    std::fs::write(path, text + "\n")?;
    Ok(())
}

#[derive(Serialize)]
struct RunRow<'a> {
    benchmark: &'a str,
    strategy: &'a str,
    seed: u64,
    cut: i64,
    feasible: bool,
    imbalance_score: f64,
    rur_deviation: f64,
    wall_ms: f64,
    best: bool,
}

/// One row per run of a single report.
pub fn write_runs_csv(report: &ResultReport, path: impl AsRef<Path>) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    for (i, r) in report.runs.iter().enumerate() {
        w.serialize(RunRow {
            benchmark: &report.benchmark,
            strategy: report.strategy.name(),
            seed: r.seed,
            cut: r.cut,
            feasible: r.feasible,
            imbalance_score: r.imbalance_score,
            rur_deviation: r.rur_deviation,
            wall_ms: r.wall_ms,
            best: i == report.best_run_index,
        })
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct SuiteCsvRow<'a> {
    benchmark: &'a str,
    strategy: &'a str,
    cut: i64,
    norm_cut_vs_sm: f64,
    rur_dev: f64,
    time_norm: f64,
    feasible: bool,
}

/// One row per benchmark × strategy.
pub fn write_suite_csv(summary: &SuiteSummary, path: impl AsRef<Path>) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    for r in &summary.rows {
        w.serialize(SuiteCsvRow {
            benchmark: &r.benchmark,
            strategy: r.strategy.name(),
            cut: r.cut,
            norm_cut_vs_sm: r.norm_cut_vs_sm,
            rur_dev: r.rur_dev,
            time_norm: r.time_norm,
            feasible: r.feasible,
        })
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}
