//! Tabular results with an embedded run manifest.
//!
//! The checksum covers the CSV data section (column header plus rows), so
//! CSV and JSON outputs of one run carry the same value.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use crate::args::Format;

pub const SCHEMA_VERSION: u32 = 1;
pub const LIBRARY_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(u64),
    Real(f64),
    Text(String),
    Bool(bool),
    /// Not applicable for this row; written as an empty field or `null`.
    Empty,
}

impl Cell {
    /// Reals keep 17 significant digits so they round-trip exactly.
    fn to_field(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Real(v) if v.is_finite() => format!("{v:.16e}"),
            Cell::Real(v) if v.is_nan() => "nan".into(),
            Cell::Real(v) => if *v > 0.0 { "inf" } else { "-inf" }.into(),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
            Cell::Empty => String::new(),
        }
    }

    fn to_json(&self) -> Value {
        match self {
            Cell::Int(v) => json!(v),
            Cell::Real(v) if v.is_finite() => json!(v),
            Cell::Real(_) => Value::String(self.to_field()),
            Cell::Text(s) => json!(s),
            Cell::Bool(b) => json!(b),
            Cell::Empty => Value::Null,
        }
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Real(v)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(v: Option<T>) -> Self {
        v.map_or(Cell::Empty, Into::into)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    pub name: String,
    pub unit: &'static str,
}

/// Named, unit-annotated columns plus rows of equal width.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub columns: Vec<Column>,
    pub rows: Vec<Vec<Cell>>,
    /// Free-form lines written as CSV comments and as JSON `notes`.
    pub notes: Vec<String>,
    /// Extra structured results for the JSON output.
    pub summary: Option<Value>,
}

impl Table {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn column(mut self, name: impl Into<String>, unit: &'static str) -> Self {
        self.columns.push(Column {
            name: name.into(),
            unit,
        });
        self
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    fn data_section(&self) -> Vec<u8> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        w.write_record(self.columns.iter().map(|c| c.name.as_str()))
            .expect("writing to memory");
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::to_field))
                .expect("writing to memory");
        }
        w.into_inner().expect("writing to memory")
    }
}

/// Everything needed to reproduce an output file.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub schema_version: u32,
    pub subcommand: String,
    pub parameters: Value,
    pub library_version: &'static str,
    pub seed: Option<u64>,
    /// SHA-256 of the CSV data section, hex encoded.
    pub checksum: String,
}

impl RunManifest {
    pub fn new(subcommand: &str, parameters: Value, seed: Option<u64>) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            subcommand: subcommand.to_string(),
            parameters,
            library_version: LIBRARY_VERSION,
            seed,
            checksum: String::new(),
        }
    }
}

pub fn render_csv(manifest: &RunManifest, table: &Table) -> Vec<u8> {
    let data = table.data_section();
    let mut m = manifest.clone();
    m.checksum = hex::encode(Sha256::digest(&data));
    let mut out = Vec::new();
    let seed = m.seed.map_or_else(|| "none".to_string(), |s| s.to_string());
    let params = serde_json::to_string(&m.parameters).expect("parameters are plain JSON");
    // Writes to a Vec cannot fail.
    let _ = writeln!(out, "# playout {}", m.library_version);
    let _ = writeln!(out, "# schema_version: {}", m.schema_version);
    let _ = writeln!(out, "# subcommand: {}", m.subcommand);
    let _ = writeln!(out, "# parameters: {params}");
    let _ = writeln!(out, "# seed: {seed}");
    let _ = writeln!(out, "# sha256: {}", m.checksum);
    for c in &table.columns {
        let _ = writeln!(out, "# column {}: {}", c.name, c.unit);
    }
    for n in &table.notes {
        let _ = writeln!(out, "# note: {n}");
    }
    out.extend_from_slice(&data);
    out
}

pub fn render_json(manifest: &RunManifest, table: &Table) -> Vec<u8> {
    let mut m = manifest.clone();
    m.checksum = hex::encode(Sha256::digest(table.data_section()));
    let units: Map<String, Value> = table
        .columns
        .iter()
        .map(|c| (c.name.clone(), Value::String(c.unit.to_string())))
        .collect();
    let rows: Vec<Value> = table
        .rows
        .iter()
        .map(|r| {
            let obj: Map<String, Value> = table
                .columns
                .iter()
                .zip(r)
                .map(|(c, v)| (c.name.clone(), v.to_json()))
                .collect();
            Value::Object(obj)
        })
        .collect();
    let mut doc = json!({
        "manifest": m,
        "units": units,
        "results": rows,
    });
    if !table.notes.is_empty() {
        doc["notes"] = json!(table.notes);
    }
    if let Some(s) = &table.summary {
        doc["summary"] = s.clone();
    }
    let mut out = serde_json::to_vec_pretty(&doc).expect("document is plain JSON");
    out.push(b'\n');
    out
}

/// Writes the requested formats next to `out` with its extension replaced,
/// or CSV/JSON to `stdout` when no path is given.
pub fn emit(
    manifest: &RunManifest,
    table: &Table,
    out: Option<&Path>,
    format: Format,
    stdout: &mut dyn Write,
) -> io::Result<()> {
    let csv = matches!(format, Format::Csv | Format::Both);
    let json = matches!(format, Format::Json | Format::Both);
    match out {
        Some(path) => {
            if csv {
                fs::write(with_ext(path, "csv"), render_csv(manifest, table))?;
            }
            if json {
                fs::write(with_ext(path, "json"), render_json(manifest, table))?;
            }
        }
        None => {
            if csv {
                stdout.write_all(&render_csv(manifest, table))?;
            }
            if json {
                stdout.write_all(&render_json(manifest, table))?;
            }
        }
    }
    stdout.flush()
}

fn with_ext(path: &Path, ext: &str) -> PathBuf {
    path.with_extension(ext)
}
