//! CSV tables and JSON sidecars.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Unit {
    /// Energies and couplings; `omega` or `rad/s` under `--si`.
    Energy,
    Dimensionless,
    Metre,
    RadPerSecond,
    PerOmega,
    Text,
}

#[derive(Debug, Clone, Serialize)]
pub struct Column {
    pub name: String,
    pub unit: Unit,
    pub description: &'static str,
}

pub fn col(name: impl Into<String>, unit: Unit, description: &'static str) -> Column {
    Column { name: name.into(), unit, description }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
    Empty,
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Empty, Cell::Num)
    }
}

#[derive(Debug, Clone)]
pub struct Table {
    pub columns: Vec<Column>,
    pub rows: Vec<Vec<Cell>>,
    /// Multiplies every `Unit::Energy` column.
    pub energy_scale: f64,
}

pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

impl Table {
    pub fn new(columns: Vec<Column>) -> Self {
        Self { columns, rows: Vec::new(), energy_scale: 1.0 }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn energy_unit(&self) -> &'static str {
        if self.energy_scale == 1.0 {
            "omega"
        } else {
            "rad/s"
        }
    }

    fn unit_label(&self, unit: Unit) -> &'static str {
        match unit {
            Unit::Energy => self.energy_unit(),
            Unit::Dimensionless => "1",
            Unit::Metre => "m",
            Unit::RadPerSecond => "rad/s",
            Unit::PerOmega if self.energy_scale != 1.0 => "s/rad",
            Unit::PerOmega => "1/omega",
            Unit::Text => "text",
        }
    }

    /// Numeric value of `(row, column)` after unit scaling.
    pub fn value(&self, row: usize, column: usize) -> Option<f64> {
        match self.rows[row][column] {
            Cell::Num(v) if self.columns[column].unit == Unit::Energy => Some(v * self.energy_scale),
            Cell::Num(v) if self.columns[column].unit == Unit::PerOmega => Some(v / self.energy_scale),
            Cell::Num(v) => Some(v),
            Cell::Int(v) => Some(v as f64),
            _ => None,
        }
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    /// Header `name [unit]`, floats with 17 significant digits, `\n` endings.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let header: Vec<String> =
            self.columns.iter().map(|c| format!("{} [{}]", c.name, self.unit_label(c.unit))).collect();
        out.push_str(&header.join(","));
        out.push('\n');
        for (r, row) in self.rows.iter().enumerate() {
            let cells: Vec<String> = row
                .iter()
                .enumerate()
                .map(|(c, cell)| match cell {
                    Cell::Num(_) => format_float(self.value(r, c).expect("numeric cell")),
                    Cell::Int(v) => v.to_string(),
                    Cell::Text(s) => quote(s),
                    Cell::Empty => String::new(),
                })
                .collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn column_docs(&self) -> Value {
        Value::Array(
            self.columns
                .iter()
                .map(|c| json!({ "name": c.name, "unit": self.unit_label(c.unit), "description": c.description }))
                .collect(),
        )
    }
}

fn quote(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Output location `<dir>/<stem>.{csv,json,svg}`.
#[derive(Debug, Clone)]
pub struct Artifacts {
    pub dir: PathBuf,
    pub stem: String,
}

impl Artifacts {
    pub fn new(dir: &Path, stem: &str) -> Result<Self, CliError> {
        fs::create_dir_all(dir)
            .map_err(|e| CliError::Config(format!("cannot create output directory {}: {e}", dir.display())))?;
        Ok(Self { dir: dir.to_path_buf(), stem: stem.to_string() })
    }

    pub fn path(&self, ext: &str) -> PathBuf {
        self.dir.join(format!("{}.{ext}", self.stem))
    }

    pub fn write(&self, ext: &str, contents: &str) -> Result<PathBuf, CliError> {
        let path = self.path(ext);
        let mut f = fs::File::create(&path)
            .map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))?;
        f.write_all(contents.as_bytes())
            .map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))?;
        Ok(path)
    }
}
