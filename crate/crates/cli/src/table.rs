use std::io::Write;

use anyhow::Result;
use serde_json::{Map, Value};

/// One output cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
}

impl Cell {
    /// Shortest representation that parses back to the same double (at most
    /// 17 significant digits).
    pub fn render(&self) -> String {
        match self {
            Cell::Num(v) => format_f64(*v),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }

    fn to_json(&self) -> Value {
        match self {
            Cell::Num(v) => serde_json::Number::from_f64(*v).map_or(Value::Null, Value::Number),
            Cell::Int(v) => Value::from(*v),
            Cell::Text(s) => Value::from(s.as_str()),
        }
    }
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

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v as i64)
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

pub fn format_f64(v: f64) -> String {
    if v.is_nan() {
        "NaN".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{v:?}")
    }
}

/// Metadata, a header and rows, plus an optional trailing block of
/// key/value pairs that follows the data.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub metadata: Vec<(String, Cell)>,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
    pub trailer_name: &'static str,
    pub trailer: Vec<(String, Cell)>,
}

impl Table {
    pub fn meta(&mut self, key: &str, value: impl Into<Cell>) {
        self.metadata.push((key.to_string(), value.into()));
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        for (k, v) in &self.metadata {
            writeln!(out, "# {k}={}", v.render())?;
        }
        let mut w = csv::WriterBuilder::new().from_writer(&mut out);
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render))?;
        }
        w.flush()?;
        drop(w);
        for (k, v) in &self.trailer {
            writeln!(out, "# {}.{k}={}", self.trailer_name, v.render())?;
        }
        Ok(())
    }

    pub fn to_json(&self) -> Value {
        let pairs = |items: &[(String, Cell)]| {
            let mut m = Map::new();
            for (k, v) in items {
                m.insert(k.clone(), v.to_json());
            }
            Value::Object(m)
        };
        let rows = self
            .rows
            .iter()
            .map(|row| {
                let mut m = Map::new();
                for (c, v) in self.columns.iter().zip(row) {
                    m.insert(c.to_string(), v.to_json());
                }
                Value::Object(m)
            })
            .collect();
        let mut root = Map::new();
        root.insert("metadata".into(), pairs(&self.metadata));
        root.insert("rows".into(), Value::Array(rows));
        if !self.trailer.is_empty() {
            root.insert(self.trailer_name.into(), pairs(&self.trailer));
        }
        Value::Object(root)
    }

    pub fn write_json<W: Write>(&self, mut out: W) -> Result<()> {
        serde_json::to_writer_pretty(&mut out, &self.to_json())?;
        writeln!(out)?;
        Ok(())
    }
}
