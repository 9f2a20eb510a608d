//! CSV result tables and the JSON-lines run manifest.

use std::fs::OpenOptions;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use crate::config::{CliError, CliResult, RunConfig};

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
    Bool(bool),
}

impl Cell {
    /// Fixed 17-significant-digit rendering of floats.
    pub fn render(&self) -> String {
        match self {
            Cell::Num(x) if x.is_finite() => format!("{x:.16e}"),
            Cell::Num(x) => x.to_string(),
            Cell::Int(i) => i.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<bool> for Cell {
    fn from(x: bool) -> Self {
        Cell::Bool(x)
    }
}

impl From<String> for Cell {
    fn from(x: String) -> Self {
        Cell::Text(x)
    }
}

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::Text(x.to_string())
    }
}

#[derive(Debug, Clone, Default)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(header: &[&'static str]) -> Self {
        Table {
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> CliResult<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| CliError::Io(e.to_string());
        w.write_record(&self.header).map_err(io)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render)).map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| CliError::Io(e.to_string()))
    }
}

/// Where a run writes its table and manifest.
pub struct Destination {
    pub csv: Option<PathBuf>,
    pub manifest: Option<PathBuf>,
}

impl Destination {
    pub fn from_config(cfg: &RunConfig) -> Self {
        let csv = cfg.raw("out").map(PathBuf::from);
        let manifest = cfg
            .raw("manifest")
            .map(PathBuf::from)
            .or_else(|| csv.as_ref().map(|p| p.with_extension("manifest.jsonl")));
        Destination { csv, manifest }
    }
}

pub fn write_csv(path: &Path, text: &str) -> CliResult<()> {
    std::fs::write(path, text).map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
}

pub struct ManifestEntry<'a> {
    pub cfg: &'a RunConfig,
    pub tolerances: Value,
    pub elapsed: f64,
    pub rows: usize,
    pub csv: Option<&'a Path>,
    pub status: Result<(), &'a CliError>,
}

impl ManifestEntry<'_> {
    pub fn to_json(&self) -> Value {
        let (status, exit_code, error) = match self.status {
            Ok(()) => ("ok", 0, Value::Null),
            Err(e) => ("error", e.exit_code(), Value::String(e.to_string())),
        };
        json!({
            "command": self.cfg.command,
            "version": env!("CARGO_PKG_VERSION"),
            "inputs": self.cfg.values,
            "tolerances": self.tolerances,
            "elapsed_seconds": self.elapsed,
            "rows": self.rows,
            "csv": self.csv.map(|p| p.display().to_string()),
            "status": status,
            "exit_code": exit_code,
            "error": error,
        })
    }
}

pub fn append_manifest(path: &Path, entry: &Value) -> CliResult<()> {
    let mut f = OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(|e| CliError::Io(format!("cannot open {}: {e}", path.display())))?;
    writeln!(f, "{entry}").map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_keep_17_digits_and_text_is_quoted() {
        let mut t = Table::new(&["x", "label"]);
        t.push(vec![Cell::Num(0.1), Cell::from("a,\"b\"")]);
        let csv = t.to_csv().unwrap();
        assert_eq!(csv, "x,label\n1.0000000000000001e-1,\"a,\"\"b\"\"\"\n");
        let back: f64 = "1.0000000000000001e-1".parse().unwrap();
        assert_eq!(back, 0.1);
    }
}
