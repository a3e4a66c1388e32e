//! Plot-ready records: `#` metadata lines, a header and data rows in CSV, or
//! the same content as JSON.

use serde::{Deserialize, Serialize};
use serde_json::Value;
use std::fmt::Write as _;

/// Metadata keys present in every record, in output order.
pub const META_KEYS: [&str; 9] = ["command", "version", "beta", "regime", "n", "tau", "sigma", "seed", "channel"];

/// One table cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Cell {
    Num(f64),
    Text(String),
}

impl Cell {
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Num(v) => Some(*v),
            Cell::Text(_) => None,
        }
    }

    fn csv(&self) -> String {
        match self {
            // `Display` for f64 is the shortest string that round-trips.
            Cell::Num(v) => format!("{v}"),
            Cell::Text(s) => s.clone(),
        }
    }

    fn parse(s: &str) -> Cell {
        match s.parse::<f64>() {
            Ok(v) => Cell::Num(v),
            Err(_) => Cell::Text(s.to_string()),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

/// A table with fixed metadata.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveRecord {
    pub meta: serde_json::Map<String, Value>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

/// Output encoding.
#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

impl CurveRecord {
    /// Record with every metadata key set to `"none"` until filled in.
    pub fn new(columns: &[&str]) -> Self {
        let meta = META_KEYS.iter().map(|k| (k.to_string(), Value::String("none".into()))).collect();
        Self { meta, columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn set(&mut self, key: &str, value: impl ToString) {
        debug_assert!(META_KEYS.contains(&key), "unknown metadata key {key}");
        self.meta.insert(key.to_string(), Value::String(value.to_string()));
    }

    pub fn meta(&self, key: &str) -> Option<&str> {
        self.meta.get(key).and_then(Value::as_str)
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.columns.iter().position(|c| c == name)?;
        self.rows.iter().map(|r| r[k].as_f64()).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        for k in META_KEYS {
            let v = self.meta(k).unwrap_or("none");
            let _ = writeln!(s, "# {k}={v}");
        }
        let _ = writeln!(s, "{}", self.columns.join(","));
        for r in &self.rows {
            let cells: Vec<String> = r.iter().map(Cell::csv).collect();
            let _ = writeln!(s, "{}", cells.join(","));
        }
        s
    }

    pub fn from_csv(text: &str) -> Result<Self, String> {
        let mut meta = serde_json::Map::new();
        let mut lines = text.lines();
        let header = loop {
            let line = lines.next().ok_or("missing header row")?;
            match line.strip_prefix("# ") {
                Some(kv) => {
                    let (k, v) = kv.split_once('=').ok_or_else(|| format!("bad metadata line {line}"))?;
                    meta.insert(k.to_string(), Value::String(v.to_string()));
                }
                None => break line,
            }
        };
        let columns: Vec<String> = header.split(',').map(str::to_string).collect();
        let mut rows = Vec::new();
        for line in lines.filter(|l| !l.is_empty()) {
            let row: Vec<Cell> = line.split(',').map(Cell::parse).collect();
            if row.len() != columns.len() {
                return Err(format!("row has {} cells, header has {}", row.len(), columns.len()));
            }
            rows.push(row);
        }
        Ok(Self { meta, columns, rows })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("records serialize")
    }

    pub fn from_json(text: &str) -> Result<Self, String> {
        serde_json::from_str(text).map_err(|e| e.to_string())
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json() + "\n",
        }
    }
}
