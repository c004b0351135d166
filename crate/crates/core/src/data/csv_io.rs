//! Labelled feature CSV: header `label,f0,f1,...`, one row per sample.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use super::Dataset;
use crate::error::{CsvError, Error, Result};
use crate::numerics::Matrix;

pub fn load_csv(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    read_csv(file, &name)
}

pub fn read_csv(source: impl Read, name: &str) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(source);
    let mut records = reader.records();

    let header = match records.next() {
        None => return Err(CsvError::Empty.into()),
        Some(r) => r.map_err(parse_error)?,
    };
    let header_line = line_of(&header);
    let valid_header = header.len() >= 2
        && &header[0] == "label"
        && header.iter().skip(1).enumerate().all(|(i, h)| h == format!("f{i}"));
    if !valid_header {
        return Err(CsvError::MissingHeader { line: header_line }.into());
    }
    let width = header.len();
    let dim = width - 1;

    let mut data = Vec::new();
    let mut labels = Vec::new();
    for record in records {
        let record = record.map_err(parse_error)?;
        let line = line_of(&record);
        if record.len() != width {
            return Err(CsvError::Ragged {
                line,
                expected: width,
                found: record.len(),
            }
            .into());
        }
        let label_cell = &record[0];
        let label: usize = label_cell.parse().map_err(|_| CsvError::NonNumeric {
            line,
            cell: label_cell.to_string(),
        })?;
        labels.push(label);
        for cell in record.iter().skip(1) {
            let v: f64 = cell.parse().map_err(|_| CsvError::NonNumeric {
                line,
                cell: cell.to_string(),
            })?;
            if !v.is_finite() {
                return Err(CsvError::Parse {
                    line,
                    message: format!("non-finite value {cell:?}"),
                }
                .into());
            }
            data.push(v);
        }
    }

    let num_classes = labels.iter().max().map_or(0, |m| m + 1);
    let mut seen = vec![false; num_classes];
    for &l in &labels {
        seen[l] = true;
    }
    for (k, present) in seen.iter().enumerate() {
        if !present {
            log::warn!("class {k} has no rows in {name}");
        }
    }
    let n = labels.len();
    Dataset::new(Matrix::new(n, dim, data)?, labels, num_classes, name)
}

pub fn save_csv(ds: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    write_csv(ds, &mut out).map_err(|e| match e {
        Error::Io { source, .. } => Error::io(path, source),
        other => other,
    })?;
    out.flush().map_err(|e| Error::io(path, e))
}

/// Writes features with shortest round-trip float formatting.
pub fn write_csv(ds: &Dataset, sink: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    let mut header = vec!["label".to_string()];
    header.extend((0..ds.dim()).map(|i| format!("f{i}")));
    w.write_record(&header).map_err(write_error)?;
    for (r, label) in ds.labels.iter().enumerate() {
        let mut row = vec![label.to_string()];
        row.extend(ds.features.row(r).iter().map(|v| format!("{v:?}")));
        w.write_record(&row).map_err(write_error)?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))
}

fn line_of(record: &csv::StringRecord) -> usize {
    record.position().map_or(0, |p| p.line() as usize)
}

fn parse_error(e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line() as usize);
    CsvError::Parse {
        line,
        message: e.to_string(),
    }
    .into()
}

fn write_error(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io("<csv>", io),
        other => Error::InvalidConfig(format!("csv write failed: {other:?}")),
    }
}
