//! Tables, JSON files and run manifests.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use chrono::{DateTime, SecondsFormat, Utc};
use serde::Serialize;

use crate::settings::{Format, Settings};
use crate::CliError;

/// A table cell. Floats are written in shortest round-trip form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Cell {
    Int(u64),
    Num(f64),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as u64)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(header: &[&'static str]) -> Self {
        Table { header: header.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<Vec<u8>, CliError> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.serialize(row)?;
        }
        w.into_inner().map_err(|e| CliError::Io(e.to_string()))
    }

    /// An array of objects keyed by the header.
    pub fn to_json(&self) -> serde_json::Value {
        let rows = self
            .rows
            .iter()
            .map(|row| {
                let obj = self
                    .header
                    .iter()
                    .zip(row)
                    .map(|(k, c)| (k.to_string(), serde_json::to_value(c).unwrap_or(serde_json::Value::Null)))
                    .collect();
                serde_json::Value::Object(obj)
            })
            .collect();
        serde_json::Value::Array(rows)
    }
}

/// Writes files below one output directory and remembers their paths.
pub struct OutputDir {
    root: PathBuf,
    written: Vec<PathBuf>,
}

impl OutputDir {
    pub fn create(root: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(root).map_err(|e| CliError::Io(format!("{}: {e}", root.display())))?;
        Ok(OutputDir { root: root.to_path_buf(), written: Vec::new() })
    }

    pub fn write_bytes(&mut self, rel: &str, bytes: &[u8]) -> Result<(), CliError> {
        let path = self.root.join(rel);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(|e| CliError::Io(format!("{}: {e}", parent.display())))?;
        }
        let mut f = fs::File::create(&path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        f.write_all(bytes).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        self.written.push(PathBuf::from(rel));
        Ok(())
    }

    /// Writes `stem.csv` or `stem.json` depending on `format`.
    pub fn write_table(&mut self, stem: &str, table: &Table, format: Format) -> Result<(), CliError> {
        match format {
            Format::Csv => self.write_bytes(&format!("{stem}.csv"), &table.to_csv()?),
            Format::Json => self.write_json(&format!("{stem}.json"), &table.to_json()),
        }
    }

    pub fn write_json<T: Serialize>(&mut self, rel: &str, value: &T) -> Result<(), CliError> {
        let mut bytes = serde_json::to_vec_pretty(value)?;
        bytes.push(b'\n');
        self.write_bytes(rel, &bytes)
    }

    /// Writes `manifest.json` listing every file written so far.
    pub fn finish(mut self, subcommand: &str, settings: &Settings, started: DateTime<Utc>) -> Result<(), CliError> {
        let manifest = RunManifest {
            subcommand: subcommand.to_string(),
            params: settings.clone(),
            seed: settings.seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
            args: settings.to_args(subcommand),
            started: started.to_rfc3339_opts(SecondsFormat::Millis, true),
            finished: Utc::now().to_rfc3339_opts(SecondsFormat::Millis, true),
            outputs: self.written.iter().map(|p| p.display().to_string()).collect(),
        };
        self.write_json("manifest.json", &manifest)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub params: Settings,
    pub seed: u64,
    pub version: String,
    /// Arguments that reproduce the run.
    pub args: Vec<String>,
    pub started: String,
    pub finished: String,
    pub outputs: Vec<String>,
}
