//! CSV ingestion of observed series.

use std::path::Path;

use oucpd::TimeSeries;

use crate::error::{CliError, Result};

/// Reads a two-column CSV (header row, configurable column names) into a
/// series with the user-supplied step. With `log_transform`, values are
/// natural-log transformed and must be positive.
pub fn ingest_csv(
    path: &Path,
    time_column: &str,
    value_column: &str,
    delta_t: f64,
    log_transform: bool,
) -> Result<TimeSeries> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;

    let headers = reader.headers()?.clone();
    let value_idx = headers
        .iter()
        .position(|h| h == value_column)
        .ok_or_else(|| {
            CliError::Data(format!(
                "column '{value_column}' not found; header has {:?}",
                headers.iter().collect::<Vec<_>>()
            ))
        })?;
    // The time column is required to exist but its values are not used:
    // the grid comes from the explicit --dt.
    if !headers.iter().any(|h| h == time_column) {
        return Err(CliError::Data(format!(
            "column '{time_column}' not found; header has {:?}",
            headers.iter().collect::<Vec<_>>()
        )));
    }

    let mut values = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record?;
        let line = record
            .position()
            .map(|p| p.line().to_string())
            .unwrap_or_else(|| format!("{}", row + 2));
        let cell = record
            .get(value_idx)
            .ok_or_else(|| CliError::Data(format!("row at line {line}: missing value column")))?;
        let mut v: f64 = cell
            .parse()
            .map_err(|_| CliError::Data(format!("row at line {line}: '{cell}' is not a number")))?;
        if log_transform {
            if v <= 0.0 {
                return Err(CliError::Data(format!(
                    "row at line {line}: value {v} is not positive, cannot log-transform"
                )));
            }
            v = v.ln();
        }
        values.push(v);
    }
    if values.len() < 3 {
        return Err(CliError::Data(format!(
            "{} rows parsed; at least 3 are required",
            values.len()
        )));
    }
    Ok(TimeSeries::new(delta_t, values)?)
}
