//! CSV and JSON writers for Monte Carlo results.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use ace_core::simulate::{McReport, McRow, ReplicateRecord, SweepAxis, SweepPoint};
use serde::Serialize;

use crate::error::{CliError, CliResult};

const REPORT_COLUMNS: [&str; 11] = [
    "n",
    "theta0",
    "estimator",
    "rmse",
    "bias",
    "sd",
    "coverage",
    "mean_ci_width",
    "replicates",
    "failures",
    "excessive_failures",
];

fn report_fields(report: &McReport, row: &McRow) -> Vec<String> {
    vec![
        report.n.to_string(),
        report.theta0.to_string(),
        row.label.clone(),
        row.rmse.to_string(),
        row.bias.to_string(),
        row.sd.to_string(),
        row.coverage.to_string(),
        row.mean_ci_width.to_string(),
        row.replicates.to_string(),
        row.failures.to_string(),
        row.excessive_failures.to_string(),
    ]
}

pub fn ensure_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

fn csv_writer(path: &Path) -> CliResult<csv::Writer<BufWriter<File>>> {
    let file = File::create(path).map_err(|e| CliError::io(path, e))?;
    Ok(csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(BufWriter::new(file)))
}

fn csv_err(path: &Path, e: csv::Error) -> CliError {
    CliError::io(path, std::io::Error::other(e))
}

fn write_rows<I, R>(path: &Path, header: &[&str], rows: I) -> CliResult<()>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let mut w = csv_writer(path)?;
    w.write_record(header).map_err(|e| csv_err(path, e))?;
    for row in rows {
        w.write_record(row).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

pub fn write_report_csv(path: &Path, report: &McReport) -> CliResult<()> {
    write_rows(path, &REPORT_COLUMNS, report.rows.iter().map(|row| report_fields(report, row)))
}

pub fn write_estimates_csv(path: &Path, records: &[ReplicateRecord]) -> CliResult<()> {
    let header = ["replicate", "estimator", "theta_hat", "std_error", "ci_lo", "ci_hi", "covered"];
    write_rows(
        path,
        &header,
        records.iter().map(|r| {
            vec![
                r.replicate.to_string(),
                r.estimator.to_string(),
                r.theta_hat.to_string(),
                r.std_error.to_string(),
                r.ci_lo.to_string(),
                r.ci_hi.to_string(),
                r.covered.to_string(),
            ]
        }),
    )
}

/// One row per (grid value, estimator).
pub fn write_sweep_csv(path: &Path, axis: SweepAxis, points: &[SweepPoint]) -> CliResult<()> {
    let axis_name = axis.to_string();
    let mut header = vec![axis_name.as_str()];
    header.extend(REPORT_COLUMNS);
    let rows = points.iter().flat_map(|pt| {
        let report = &pt.outcome.report;
        report.rows.iter().map(move |row| {
            let mut fields = vec![pt.value.to_string()];
            fields.extend(report_fields(report, row));
            fields
        })
    });
    write_rows(path, &header, rows)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::io(path, std::io::Error::other(e)))?;
    text.push('\n');
    let mut file = File::create(path).map_err(|e| CliError::io(path, e))?;
    file.write_all(text.as_bytes()).map_err(|e| CliError::io(path, e))
}

#[derive(Serialize)]
pub struct SweepJson<'a> {
    pub suite: &'a str,
    pub axis: SweepAxis,
    pub base_seed: u64,
    pub reps: usize,
    pub points: Vec<SweepPointJson<'a>>,
}

#[derive(Serialize)]
pub struct SweepPointJson<'a> {
    pub value: f64,
    pub report: &'a McReport,
}
