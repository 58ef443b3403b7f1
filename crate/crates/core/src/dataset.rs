//! CSV ingestion: comma-separated, `.` decimal point, an optional single
//! header row recognized by any non-numeric cell in the first record.

use std::io::Read;
use std::path::Path;

use crate::error::{Error, Result};
use crate::linalg::{Sample, SpdMatrix, SquareMatrix};

/// Numeric observations with optional column names.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub columns: Option<Vec<String>>,
    pub sample: Sample,
}

fn parse_cell(raw: &str) -> Option<f64> {
    raw.trim().parse::<f64>().ok()
}

/// Parses a numeric table; errors carry 1-based row and column numbers
/// counted in the file, header included.
pub fn read_dataset<R: Read>(reader: R) -> Result<Dataset> {
    let mut csv = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut columns = None;
    let mut sample: Option<Sample> = None;
    for (i, record) in csv.records().enumerate() {
        let row = i + 1;
        let record = record.map_err(|e| Error::Parse {
            row,
            col: 0,
            message: e.to_string(),
        })?;
        if record.iter().all(|c| c.is_empty()) {
            continue;
        }
        if i == 0 && record.iter().any(|c| parse_cell(c).is_none()) {
            columns = Some(record.iter().map(str::to_string).collect());
            continue;
        }
        let expected = columns
            .as_ref()
            .map(Vec::len)
            .or_else(|| sample.as_ref().map(Sample::dim))
            .unwrap_or(record.len());
        if record.len() != expected {
            return Err(Error::Parse {
                row,
                col: record.len().min(expected) + 1,
                message: format!("expected {expected} fields, found {}", record.len()),
            });
        }
        let mut values = Vec::with_capacity(record.len());
        for (j, cell) in record.iter().enumerate() {
            let v = parse_cell(cell).filter(|v| v.is_finite()).ok_or_else(|| Error::Parse {
                row,
                col: j + 1,
                message: format!("'{cell}' is not a finite number"),
            })?;
            values.push(v);
        }
        sample
            .get_or_insert_with(|| Sample::with_dim(expected))
            .push(&values);
    }
    let sample = sample.ok_or(Error::EmptyData)?;
    Ok(Dataset { columns, sample })
}

pub fn read_dataset_path(path: &Path) -> Result<Dataset> {
    let file = std::fs::File::open(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    read_dataset(file)
}

/// A `d × d` scatter matrix from CSV, checked symmetric positive definite.
pub fn read_scatter<R: Read>(reader: R) -> Result<SpdMatrix> {
    let data = read_dataset(reader)?;
    let rows = data.sample.to_rows();
    if rows.len() != data.sample.dim() {
        return Err(Error::DimensionMismatch {
            expected: data.sample.dim(),
            got: rows.len(),
        });
    }
    SpdMatrix::new(SquareMatrix::from_rows(&rows)?)
}

pub fn read_scatter_path(path: &Path) -> Result<SpdMatrix> {
    let file = std::fs::File::open(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    read_scatter(file)
}

/// Writes rows as CSV with an optional header, numbers in shortest
/// round-trip form.
pub fn write_dataset(columns: Option<&[String]>, sample: &Sample) -> String {
    let mut out = String::new();
    if let Some(cols) = columns {
        out.push_str(&cols.join(","));
        out.push('\n');
    }
    for row in sample.rows() {
        let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}
