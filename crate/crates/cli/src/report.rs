//! Tabular reports rendered as CSV or as JSON carrying the full config.

use serde::Serialize;
use serde_json::{Map, Value};

pub enum Cell {
    Text(String),
    Int(u64),
    Float(f64),
    Bool(bool),
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

impl From<usize> for Cell {
    fn from(n: usize) -> Self {
        Cell::Int(n as u64)
    }
}

impl From<u64> for Cell {
    fn from(n: u64) -> Self {
        Cell::Int(n)
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x)
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Bool(b)
    }
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Text(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
            Cell::Text(s) => s.clone(),
            Cell::Int(n) => n.to_string(),
            Cell::Float(x) => format!("{x:?}"),
            Cell::Bool(b) => b.to_string(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Text(s) => Value::from(s.as_str()),
            Cell::Int(n) => Value::from(*n),
            // non-finite floats have no JSON number form
            Cell::Float(x) if !x.is_finite() => Value::from(format!("{x:?}")),
            Cell::Float(x) => Value::from(*x),
            Cell::Bool(b) => Value::from(*b),
        }
    }
}

pub struct Table {
    name: &'static str,
    header: Vec<&'static str>,
    rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &'static str, header: &[&'static str]) -> Self {
        Table { name, header: header.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }
}

pub struct Report<'a, C: Serialize> {
    pub config: &'a C,
    pub tables: Vec<Table>,
}

impl<C: Serialize> Report<'_, C> {
    /// One CSV block per table, separated by a blank line; a single table
    /// is plain CSV.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for (t, table) in self.tables.iter().enumerate() {
            if t > 0 {
                out.push('\n');
            }
            out.push_str(&table.header.join(","));
            out.push('\n');
            for row in &table.rows {
                out.push_str(&row.iter().map(Cell::csv).collect::<Vec<_>>().join(","));
                out.push('\n');
            }
        }
        out
    }

    pub fn to_json(&self) -> String {
        let mut root = Map::new();
        root.insert("config".into(), serde_json::to_value(self.config).expect("config serializes"));
        for table in &self.tables {
            let rows = table
                .rows
                .iter()
                .map(|row| {
                    let obj: Map<String, Value> =
                        table.header.iter().zip(row).map(|(h, c)| (h.to_string(), c.json())).collect();
                    Value::Object(obj)
                })
                .collect();
            root.insert(table.name.into(), Value::Array(rows));
        }
        let mut text = serde_json::to_string_pretty(&Value::Object(root)).expect("report serializes");
        text.push('\n');
        text
    }
}
