//! Output plumbing shared by the subcommands: seed resolution, CSV and JSON
//! emission, and the pass/fail outcome type.

use anyhow::{Context, Result};
use std::fs;
use std::path::{Path, PathBuf};

pub enum Outcome {
    Pass,
    CheckFailed,
}

/// Seed precedence: explicit flag, then `OSPLAB_SEED`, then 0.
pub fn resolve_seed(flag: Option<u64>) -> Result<u64> {
    if let Some(seed) = flag {
        return Ok(seed);
    }
    match std::env::var("OSPLAB_SEED") {
        Ok(text) => text
            .trim()
            .parse::<u64>()
            .with_context(|| format!("OSPLAB_SEED {text:?} is not a 64-bit integer")),
        Err(_) => Ok(0),
    }
}

pub fn read_file(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

/// A float cell: shortest round-trip decimal, `.` separator; `None` renders
/// as an empty field.
pub fn num(value: Option<f64>) -> String {
    match value {
        Some(v) => format!("{v}"),
        None => String::new(),
    }
}

/// One tabular result: a header row and data rows, rendered as CSV or as a
/// JSON array of objects keyed by the header.
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn to_csv(&self) -> String {
        let mut text = self.columns.join(",");
        text.push('\n');
        for row in &self.rows {
            text.push_str(&row.join(","));
            text.push('\n');
        }
        text
    }

    pub fn to_json(&self) -> String {
        let objects: Vec<serde_json::Value> = self
            .rows
            .iter()
            .map(|row| {
                let map: serde_json::Map<String, serde_json::Value> = self
                    .columns
                    .iter()
                    .zip(row)
                    .map(|(col, cell)| (col.to_string(), cell_value(cell)))
                    .collect();
                serde_json::Value::Object(map)
            })
            .collect();
        serde_json::to_string_pretty(&objects).expect("rows serialize")
    }

    /// Writes CSV to `path` when given, otherwise prints the chosen format
    /// to stdout.
    pub fn emit(&self, path: Option<&PathBuf>, json: bool) -> Result<()> {
        let text = if json { self.to_json() } else { self.to_csv() };
        match path {
            Some(p) => {
                fs::write(p, self.to_csv()).with_context(|| format!("writing {}", p.display()))?;
                if json {
                    println!("{text}");
                }
                Ok(())
            }
            None => {
                print!("{text}");
                if json && !text.ends_with('\n') {
                    println!();
                }
                Ok(())
            }
        }
    }
}

fn cell_value(cell: &str) -> serde_json::Value {
    if cell.is_empty() {
        return serde_json::Value::Null;
    }
    if let Ok(v) = cell.parse::<i64>() {
        return serde_json::Value::from(v);
    }
    if let Ok(v) = cell.parse::<f64>() {
        return serde_json::Value::from(v);
    }
    match cell {
        "true" => serde_json::Value::from(true),
        "false" => serde_json::Value::from(false),
        other => serde_json::Value::from(other),
    }
}
