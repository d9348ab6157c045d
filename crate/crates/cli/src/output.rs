//! Record tables and their CSV / JSON renderings.

use std::fs;
use std::io::{self, Write};
use std::path::Path;

use serde_json::{Map, Number, Value};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Bool(bool),
    Text(String),
}

impl Cell {
    /// Floats carry 17 significant digits, enough to round-trip any `f64`.
    pub fn render(&self) -> String {
        match self {
            Cell::Num(x) => format!("{x:.16e}"),
            Cell::Int(n) => n.to_string(),
            Cell::Bool(b) => b.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }

    fn to_json(&self) -> Value {
        match self {
            Cell::Num(x) => Number::from_f64(*x).map(Value::Number).unwrap_or(Value::Null),
            Cell::Int(n) => Value::from(*n),
            Cell::Bool(b) => Value::Bool(*b),
            Cell::Text(s) => Value::String(s.clone()),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Bool(b)
    }
}

/// Homogeneous records: every row has one cell per column.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    columns: Vec<String>,
    rows: Vec<Vec<Cell>>,
    /// Rendered as a bare JSON object rather than a one-element array.
    pub single_record: bool,
}

impl Table {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Self { columns: columns.into_iter().map(Into::into).collect(), rows: Vec::new(), single_record: false }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width does not match header");
        self.rows.push(row);
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn rows(&self) -> &[Vec<Cell>] {
        &self.rows
    }

    pub fn column(&self, name: &str) -> Option<Vec<&Cell>> {
        let j = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| &r[j]).collect())
    }

    fn record_json(&self, row: &[Cell]) -> Value {
        let mut m = Map::new();
        for (c, v) in self.columns.iter().zip(row) {
            m.insert(c.clone(), v.to_json());
        }
        Value::Object(m)
    }

    fn data_json(&self) -> Value {
        if self.single_record && self.rows.len() == 1 {
            self.record_json(&self.rows[0])
        } else {
            Value::Array(self.rows.iter().map(|r| self.record_json(r)).collect())
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Metadata {
    pub version: String,
    pub experiment: String,
    pub config: Vec<(String, String)>,
    /// Experiment-level scalars (fits, moments) that do not fit the row layout.
    pub summary: Vec<(String, Cell)>,
    pub wall_time_s: f64,
}

impl Metadata {
    fn json(&self) -> Value {
        let mut m = Map::new();
        m.insert("tool".into(), Value::from("weakdwell"));
        m.insert("version".into(), Value::from(self.version.clone()));
        m.insert("experiment".into(), Value::from(self.experiment.clone()));
        let config: Map<String, Value> = self.config.iter().map(|(k, v)| (k.clone(), Value::from(v.clone()))).collect();
        m.insert("config".into(), Value::Object(config));
        let summary: Map<String, Value> = self.summary.iter().map(|(k, v)| (k.clone(), v.to_json())).collect();
        m.insert("summary".into(), Value::Object(summary));
        m.insert("wall_time_s".into(), Cell::Num(self.wall_time_s).to_json());
        Value::Object(m)
    }
}

fn csv_error(e: csv::Error) -> io::Error {
    match e.into_kind() {
        csv::ErrorKind::Io(e) => e,
        other => io::Error::other(format!("{other:?}")),
    }
}

/// Header row plus one line per record, `\n` separated. Metadata, when
/// given, precedes the header as `#` comment lines.
pub fn emit_csv<W: Write>(table: &Table, metadata: Option<&Metadata>, mut out: W) -> io::Result<()> {
    if let Some(m) = metadata {
        writeln!(out, "# weakdwell {}", m.version)?;
        writeln!(out, "# experiment: {}", m.experiment)?;
        for (k, v) in &m.config {
            writeln!(out, "# config: {k} = {v}")?;
        }
        for (k, v) in &m.summary {
            writeln!(out, "# summary: {k} = {}", v.render())?;
        }
        writeln!(out, "# wall_time_s: {}", m.wall_time_s)?;
    }
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    w.write_record(&table.columns).map_err(csv_error)?;
    for row in &table.rows {
        w.write_record(row.iter().map(Cell::render)).map_err(csv_error)?;
    }
    w.flush()
}

/// `{"metadata": …, "data": …}`, or the bare data without metadata.
pub fn emit_json<W: Write>(table: &Table, metadata: Option<&Metadata>, mut out: W) -> io::Result<()> {
    let doc = match metadata {
        Some(m) => {
            let mut top = Map::new();
            top.insert("metadata".into(), m.json());
            top.insert("data".into(), table.data_json());
            Value::Object(top)
        }
        None => table.data_json(),
    };
    serde_json::to_writer_pretty(&mut out, &doc)?;
    out.write_all(b"\n")
}

/// Writes through a sibling temporary file and renames it into place, so a
/// failed write never leaves a truncated artifact at `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let name = path
        .file_name()
        .ok_or_else(|| CliError::io(path, io::Error::new(io::ErrorKind::InvalidInput, "not a file path")))?;
    let mut tmp_name = std::ffi::OsString::from(".");
    tmp_name.push(name);
    tmp_name.push(".partial");
    let tmp = path.with_file_name(tmp_name);
    let result = fs::write(&tmp, bytes).and_then(|_| fs::rename(&tmp, path));
    if let Err(e) = result {
        let _ = fs::remove_file(&tmp);
        return Err(CliError::io(path, e));
    }
    Ok(())
}

/// Lines of a CSV artifact that are not `#` comments.
pub fn data_section(text: &str) -> String {
    text.lines().filter(|l| !l.starts_with('#')).flat_map(|l| [l, "\n"]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Table {
        let mut t = Table::new(["x", "y"]);
        t.push(vec![Cell::Num(0.1), Cell::Num(1.0 / 3.0)]);
        t.push(vec![Cell::Num(-2.5e-300), Cell::Num(f64::MAX)]);
        t
    }

    #[test]
    fn empty_table_is_header_only() {
        let mut buf = Vec::new();
        emit_csv(&Table::new(["a", "b"]), None, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "a,b\n");
    }

    #[test]
    fn floats_round_trip() {
        let t = sample();
        let mut buf = Vec::new();
        emit_csv(&t, None, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(!text.contains('\r'));
        let mut rdr = csv::Reader::from_reader(text.as_bytes());
        let back: Vec<Vec<f64>> =
            rdr.records().map(|r| r.unwrap().iter().map(|s| s.parse().unwrap()).collect()).collect();
        let orig: Vec<Vec<f64>> = t
            .rows()
            .iter()
            .map(|r| r.iter().map(|c| if let Cell::Num(x) = c { *x } else { unreachable!() }).collect())
            .collect();
        assert_eq!(back, orig);
    }

    #[test]
    fn metadata_is_commented() {
        let m = Metadata {
            version: "0.0.0".into(),
            experiment: "dwell".into(),
            config: vec![("omega".into(), "1".into())],
            summary: vec![("gamma".into(), Cell::Num(2.0))],
            wall_time_s: 0.5,
        };
        let mut buf = Vec::new();
        emit_csv(&sample(), Some(&m), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut plain = Vec::new();
        emit_csv(&sample(), None, &mut plain).unwrap();
        assert_eq!(data_section(&text), String::from_utf8(plain).unwrap());
        assert!(text.contains("# config: omega = 1\n"));
    }

    #[test]
    fn json_shapes() {
        let mut one = Table::new(["a"]);
        one.push(vec![Cell::Num(1.5)]);
        one.single_record = true;
        let mut buf = Vec::new();
        emit_json(&one, None, &mut buf).unwrap();
        let v: Value = serde_json::from_slice(&buf).unwrap();
        assert_eq!(v["a"], 1.5);

        let mut buf = Vec::new();
        emit_json(&sample(), None, &mut buf).unwrap();
        let v: Value = serde_json::from_slice(&buf).unwrap();
        assert_eq!(v.as_array().unwrap().len(), 2);
        assert_eq!(v[0]["y"].as_f64().unwrap(), 1.0 / 3.0);
    }
}
