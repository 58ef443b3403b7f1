//! Rectangular result tables with a CSV form that re-parses to the same
//! cells and a JSON form tagged with the report schema.

use serde::ser::{SerializeMap, Serializer};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::test_engine::REPORT_SCHEMA;

/// One table cell. Reals are written in shortest round-trip form with a
/// decimal point or exponent (`5.0`, `1e-300`, `inf`, `NaN`), integers
/// without one, so a CSV round trip restores the variant; JSON writes
/// non-finite reals as strings.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Integer(i128),
    Number(f64),
    Text(String),
    Missing,
}

impl Cell {
    fn parse(raw: &str) -> Self {
        if raw.is_empty() {
            Cell::Missing
        } else if let Ok(v) = raw.parse::<i128>() {
            Cell::Integer(v)
        } else if let Ok(v) = raw.parse::<f64>() {
            Cell::Number(v)
        } else {
            Cell::Text(raw.to_string())
        }
    }

    fn render(&self) -> String {
        match self {
            Cell::Integer(v) => v.to_string(),
            Cell::Number(v) => format!("{v:?}"),
            Cell::Text(s) => s.clone(),
            Cell::Missing => String::new(),
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Number(v) => Some(*v),
            Cell::Integer(v) => Some(*v as f64),
            _ => None,
        }
    }

    /// Bitwise equality, so `NaN` cells compare equal to themselves.
    pub fn same(&self, other: &Self) -> bool {
        match (self, other) {
            (Cell::Number(a), Cell::Number(b)) => a.to_bits() == b.to_bits(),
            _ => self == other,
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Number(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Integer(v as i128)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Integer(v.into())
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Missing, Cell::Number)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl Serialize for Cell {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Cell::Integer(v) => s.serialize_i128(*v),
            Cell::Number(v) if v.is_finite() => s.serialize_f64(*v),
            Cell::Number(v) => s.serialize_str(&v.to_string()),
            Cell::Text(t) => s.serialize_str(t),
            Cell::Missing => s.serialize_none(),
        }
    }
}

/// Named columns over rows of equal width.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    name: String,
    columns: Vec<String>,
    rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new<S: Into<String>>(name: impl Into<String>, columns: impl IntoIterator<Item = S>) -> Self {
        Self {
            name: name.into(),
            columns: columns.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn rows(&self) -> &[Vec<Cell>] {
        &self.rows
    }

    pub fn push(&mut self, row: Vec<Cell>) -> Result<()> {
        if row.len() != self.columns.len() {
            return Err(Error::DimensionMismatch {
                expected: self.columns.len(),
                got: row.len(),
            });
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Cells of the named column, in row order.
    pub fn column(&self, name: &str) -> Option<Vec<&Cell>> {
        let j = self.column_index(name)?;
        Some(self.rows.iter().map(|r| &r[j]).collect())
    }

    /// Cell-by-cell bitwise comparison, names excluded.
    pub fn same_cells(&self, other: &Self) -> bool {
        self.columns == other.columns
            && self.rows.len() == other.rows.len()
            && self
                .rows
                .iter()
                .zip(&other.rows)
                .all(|(a, b)| a.iter().zip(b).all(|(x, y)| x.same(y)))
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        // Writes into memory cannot fail.
        w.write_record(&self.columns).expect("in-memory csv write");
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render)).expect("in-memory csv write");
        }
        String::from_utf8(w.into_inner().expect("in-memory csv flush")).expect("csv output is utf-8")
    }

    /// Inverse of [`Table::to_csv`]; the first record is the header.
    pub fn from_csv(name: impl Into<String>, text: &str) -> Result<Self> {
        let mut r = csv::ReaderBuilder::new().has_headers(false).from_reader(text.as_bytes());
        let mut records = r.records();
        let header = match records.next() {
            Some(rec) => rec.map_err(|e| parse_error(1, e))?,
            None => return Err(Error::EmptyData),
        };
        let mut table = Table::new(name, header.iter());
        for (i, rec) in records.enumerate() {
            let rec = rec.map_err(|e| parse_error(i + 2, e))?;
            table
                .push(rec.iter().map(Cell::parse).collect())
                .map_err(|e| Error::Parse { row: i + 2, col: 0, message: e.to_string() })?;
        }
        Ok(table)
    }

    /// `{"schema": .., "table": name, "columns": [..], "rows": [{col: cell}]}`.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&JsonTable(self)).expect("table serializes")
    }
}

fn parse_error(row: usize, e: csv::Error) -> Error {
    Error::Parse { row, col: 0, message: e.to_string() }
}

struct JsonTable<'a>(&'a Table);

struct JsonRow<'a>(&'a [String], &'a [Cell]);

impl Serialize for JsonRow<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(Some(self.0.len()))?;
        for (k, v) in self.0.iter().zip(self.1) {
            m.serialize_entry(k, v)?;
        }
        m.end()
    }
}

impl Serialize for JsonTable<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let t = self.0;
        let rows: Vec<JsonRow<'_>> = t.rows.iter().map(|r| JsonRow(&t.columns, r)).collect();
        let mut m = s.serialize_map(Some(4))?;
        m.serialize_entry("schema", REPORT_SCHEMA)?;
        m.serialize_entry("table", &t.name)?;
        m.serialize_entry("columns", &t.columns)?;
        m.serialize_entry("rows", &rows)?;
        m.end()
    }
}
