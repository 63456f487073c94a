//! CSV ingestion.

use std::fs::File;
use std::io::Read;
use std::path::Path;

use bnpmi_core::SampleMatrix;

use crate::error::{CliError, CliResult};

/// Parses a column selection such as `0,2,4` or `0-3` (ranges inclusive).
pub fn parse_columns(text: &str) -> CliResult<Vec<usize>> {
    let bad = || CliError::Input(format!("cannot parse column selection '{text}'"));
    let mut out = Vec::new();
    for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        match part.split_once('-') {
            Some((a, b)) => {
                let a: usize = a.trim().parse().map_err(|_| bad())?;
                let b: usize = b.trim().parse().map_err(|_| bad())?;
                if b < a {
                    return Err(bad());
                }
                out.extend(a..=b);
            }
            None => out.push(part.parse().map_err(|_| bad())?),
        }
    }
    if out.is_empty() {
        return Err(bad());
    }
    Ok(out)
}

/// Reads a comma-separated numeric table. Line numbers in errors are
/// one-based and count the header line.
pub fn read_csv<R: Read>(reader: R, has_header: bool, columns: Option<&[usize]>) -> CliResult<SampleMatrix> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(has_header)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut width: Option<usize> = None;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for record in rdr.records() {
        let record = record?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        if record.iter().all(str::is_empty) {
            continue;
        }
        match width {
            None => width = Some(record.len()),
            Some(w) if w != record.len() => {
                return Err(CliError::Parse {
                    line,
                    column: None,
                    message: format!("expected {w} fields, found {}", record.len()),
                })
            }
            _ => {}
        }
        let row = record
            .iter()
            .enumerate()
            .map(|(j, cell)| {
                cell.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| CliError::Parse {
                        line,
                        column: Some(j + 1),
                        message: format!("'{cell}' is not a finite number"),
                    })
            })
            .collect::<CliResult<Vec<f64>>>()?;
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(CliError::Input("no data rows".into()));
    }
    let matrix = SampleMatrix::from_rows(&rows)?;
    match columns {
        Some(cols) => matrix.select_columns(cols).map_err(|e| CliError::Input(e.to_string())),
        None => Ok(matrix),
    }
}

pub fn load_csv(path: &Path, has_header: bool, columns: Option<&[usize]>) -> CliResult<SampleMatrix> {
    let file = File::open(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })?;
    read_csv(file, has_header, columns)
}
