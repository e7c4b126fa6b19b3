use std::fmt::Write as _;

use clap::ValueEnum;
use serde_json::{json, Value};
use xorlab::fmt::g17;

pub const SCHEMA_VERSION: &str = "1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Table,
}

/// A command result rendered on demand in any output format.
pub struct Report {
    command: &'static str,
    header: Vec<String>,
    rows: Vec<Vec<Cell>>,
    extra: Vec<(String, Value)>,
}

#[derive(Debug, Clone)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
    Bool(bool),
    Missing,
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

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(v: Option<T>) -> Self {
        v.map_or(Cell::Missing, Into::into)
    }
}

/// Finite numbers as JSON numbers, the rest as strings.
pub fn json_num(v: f64) -> Value {
    if v.is_finite() {
        json!(v)
    } else {
        json!(short(v))
    }
}

/// Shortest round-trip rendering.
pub fn short(v: f64) -> String {
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let s = format!("{v:?}");
    s.strip_suffix(".0").map(str::to_string).unwrap_or(s)
}

impl Cell {
    fn json(&self) -> Value {
        match self {
            Cell::Num(v) => json_num(*v),
            Cell::Int(v) => json!(v),
            Cell::Text(s) => json!(s),
            Cell::Bool(b) => json!(b),
            Cell::Missing => Value::Null,
        }
    }

    fn text(&self, exact: bool) -> String {
        match self {
            Cell::Num(v) if exact && v.is_finite() => g17(*v),
            Cell::Num(v) => short(*v),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
            Cell::Missing => String::new(),
        }
    }
}

impl Report {
    pub fn new(command: &'static str, header: &[&str]) -> Self {
        Self {
            command,
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
            extra: Vec::new(),
        }
    }

    /// A one-row, one-column result.
    pub fn scalar(command: &'static str, name: &str, value: impl Into<Cell>) -> Self {
        let mut r = Report::new(command, &[name]);
        r.row(vec![value.into()]);
        r
    }

    pub fn header(&mut self, names: Vec<String>) -> &mut Self {
        self.header = names;
        self
    }

    pub fn row(&mut self, cells: Vec<Cell>) -> &mut Self {
        debug_assert_eq!(cells.len(), self.header.len());
        self.rows.push(cells);
        self
    }

    /// Additional top-level JSON field; appended as `key: value` lines in table output.
    pub fn extra(&mut self, key: &str, value: Value) -> &mut Self {
        self.extra.push((key.to_string(), value));
        self
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => self.json(),
            Format::Csv => self.csv(),
            Format::Table => self.table(),
        }
    }

    fn json(&self) -> String {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| {
                let obj: serde_json::Map<String, Value> =
                    self.header.iter().cloned().zip(r.iter().map(Cell::json)).collect();
                Value::Object(obj)
            })
            .collect();
        let mut top = serde_json::Map::new();
        top.insert("schema_version".into(), json!(SCHEMA_VERSION));
        top.insert("command".into(), json!(self.command));
        top.insert("rows".into(), Value::Array(rows));
        for (k, v) in &self.extra {
            top.insert(k.clone(), v.clone());
        }
        let mut s = serde_json::to_string_pretty(&Value::Object(top)).expect("serialisable");
        s.push('\n');
        s
    }

    fn csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for r in &self.rows {
            let cells: Vec<String> = r.iter().map(|c| c.text(true)).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    fn table(&self) -> String {
        let mut out = String::new();
        if self.header.len() == 1 && self.rows.len() == 1 {
            out.push_str(&self.rows[0][0].text(false));
            out.push('\n');
        } else {
            let cells: Vec<Vec<String>> = self.rows.iter().map(|r| r.iter().map(|c| c.text(false)).collect()).collect();
            let widths: Vec<usize> = (0..self.header.len())
                .map(|i| cells.iter().map(|r| r[i].len()).chain([self.header[i].len()]).max().unwrap_or(0))
                .collect();
            let line = |vals: &[String]| {
                let padded: Vec<String> = vals.iter().zip(&widths).map(|(v, w)| format!("{v:>w$}")).collect();
                padded.join("  ").trim_end().to_string()
            };
            let _ = writeln!(out, "{}", line(&self.header));
            for r in &cells {
                let _ = writeln!(out, "{}", line(r));
            }
        }
        for (k, v) in &self.extra {
            let _ = writeln!(out, "{k}: {v}");
        }
        out
    }
}
