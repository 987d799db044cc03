//! Deterministic CSV and JSON serialization of tables and grids.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::config::Format;
use crate::error::{Result, UdmError};
use crate::grid::{Axis, Grid2};
use crate::vlasov::{MaskedField, MaskedProfile};

/// Named columns with rows of optional numbers; `None` marks a masked value.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Option<f64>>>,
    pub metadata: Map<String, Value>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self { columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new(), metadata: Map::new() }
    }

    pub fn push(&mut self, row: Vec<Option<f64>>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn meta(mut self, key: &str, value: impl Serialize) -> Self {
        self.metadata.insert(key.into(), serde_json::to_value(value).unwrap_or(Value::Null));
        self
    }

    /// Rows (x, p, value) in x-major order.
    pub fn from_grid(grid: &Grid2, names: [&str; 3]) -> Self {
        let mut t = Table::new(&names);
        for (i, x) in grid.outer.nodes().enumerate() {
            for (j, p) in grid.inner.nodes().enumerate() {
                t.push(vec![Some(x), Some(p), Some(grid.get(i, j))]);
            }
        }
        t
    }

    pub fn from_masked(field: &MaskedField, names: [&str; 3]) -> Self {
        let mut t = Table::new(&names);
        for (i, x) in field.x_axis.nodes().enumerate() {
            for (j, v) in field.v_axis.nodes().enumerate() {
                t.push(vec![Some(x), Some(v), field.get(i, j)]);
            }
        }
        t.meta("masked", field.masked_count())
    }

    pub fn from_profile(profile: &MaskedProfile, names: [&str; 2]) -> Self {
        let mut t = Table::new(&names);
        for (x, v) in profile.axis.nodes().zip(&profile.values) {
            t.push(vec![Some(x), *v]);
        }
        t
    }

    pub fn from_columns(axis: &Axis, names: [&str; 2], values: &[f64]) -> Self {
        let mut t = Table::new(&names);
        for (x, v) in axis.nodes().zip(values) {
            t.push(vec![Some(x), Some(*v)]);
        }
        t
    }

    /// Header row then one line per row; 17 significant digits, `nan` for masked.
    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            for (i, v) in row.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                match v {
                    Some(v) => write!(out, "{}", format_number(*v)).expect("write to string"),
                    None => out.push_str("nan"),
                }
            }
            out.push('\n');
        }
        out
    }

    /// Metadata, column names and rows; masked values are `null`.
    pub fn to_json(&self) -> String {
        let doc = json!({
            "metadata": Value::Object(self.metadata.clone()),
            "columns": self.columns,
            "rows": self.rows,
        });
        let mut s = serde_json::to_string_pretty(&doc).expect("table serializes");
        s.push('\n');
        s
    }

    pub fn metadata_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&Value::Object(self.metadata.clone())).expect("metadata serializes");
        s.push('\n');
        s
    }

    /// Writes the table; CSV output gets a `<path>.meta.json` sidecar.
    pub fn write(&self, path: &Path, format: Format) -> Result<()> {
        match format {
            Format::Csv => {
                write_file(path, &self.to_csv())?;
                write_file(&sidecar(path), &self.metadata_json())
            }
            Format::Json => write_file(path, &self.to_json()),
        }
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(),
        }
    }
}

pub fn format_number(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        format!("{v}")
    }
}

/// `<path>.meta.json`.
pub fn sidecar(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".meta.json");
    PathBuf::from(s)
}

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| UdmError::Config(format!("cannot create {}: {e}", dir.display())))?;
    }
    std::fs::write(path, contents).map_err(|e| UdmError::Config(format!("cannot write {}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_layout() {
        let g = Grid2::from_fn(Axis::new(0.0, 1.0, 2).unwrap(), Axis::new(-1.0, 1.0, 3).unwrap(), |x, p| x + 10.0 * p);
        let t = Table::from_grid(&g, ["x", "p", "W"]);
        let csv = t.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "x,p,W");
        assert_eq!(lines.len(), 7);
        assert_eq!(lines[1], "0.0000000000000000e0,-1.0000000000000000e0,-1.0000000000000000e1");
        let back: Vec<f64> = lines[6].split(',').map(|s| s.parse().unwrap()).collect();
        assert_eq!(back, vec![1.0, 1.0, 11.0]);
        let v: f64 = format_number(std::f64::consts::PI).parse().unwrap();
        assert_eq!(v, std::f64::consts::PI);
    }

    #[test]
    fn masked_values() {
        let mut t = Table::new(&["x", "v"]);
        t.push(vec![Some(1.0), None]);
        assert!(t.to_csv().ends_with(",nan\n"));
        let j: Value = serde_json::from_str(&t.to_json()).unwrap();
        assert_eq!(j["rows"][0][1], Value::Null);
    }

    #[test]
    fn deterministic() {
        let t = Table::new(&["a"]).meta("n_max", 3).meta("label", "x");
        assert_eq!(t.to_json(), t.clone().to_json());
        assert!(t.metadata_json().find("label").unwrap() < t.metadata_json().find("n_max").unwrap());
        assert_eq!(sidecar(Path::new("a/b.csv")), PathBuf::from("a/b.csv.meta.json"));
    }
}
