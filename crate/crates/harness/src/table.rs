//! Per-replica tables and their CSV / gnuplot serialization.

use std::fmt;
use std::io::{self, Write};

use serde::Serialize;

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Value {
    Int(i64),
    UInt(u64),
    Float(f64),
    Bool(bool),
    Text(String),
    /// Not evaluated, or inconclusive.
    Missing,
}

impl Value {
    pub fn as_f64(&self) -> Option<f64> {
        match *self {
            Value::Int(x) => Some(x as f64),
            Value::UInt(x) => Some(x as f64),
            Value::Float(x) => Some(x),
            Value::Bool(b) => Some(b as u8 as f64),
            _ => None,
        }
    }

    pub fn as_bool(&self) -> Option<bool> {
        match *self {
            Value::Bool(b) => Some(b),
            _ => None,
        }
    }

    pub fn as_i64(&self) -> Option<i64> {
        match *self {
            Value::Int(x) => Some(x),
            _ => None,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(x) => write!(f, "{x}"),
            Value::UInt(x) => write!(f, "{x}"),
            Value::Float(x) => write!(f, "{x}"),
            Value::Bool(b) => write!(f, "{b}"),
            Value::Text(s) => f.write_str(s),
            Value::Missing => Ok(()),
        }
    }
}

impl From<bool> for Value {
    fn from(b: bool) -> Self {
        Value::Bool(b)
    }
}

impl From<usize> for Value {
    fn from(x: usize) -> Self {
        Value::Int(x as i64)
    }
}

impl From<u64> for Value {
    fn from(x: u64) -> Self {
        Value::UInt(x)
    }
}

impl From<f64> for Value {
    fn from(x: f64) -> Self {
        Value::Float(x)
    }
}

impl From<Option<bool>> for Value {
    fn from(b: Option<bool>) -> Self {
        b.map_or(Value::Missing, Value::Bool)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Column {
    pub name: &'static str,
    pub doc: &'static str,
}

pub const fn col(name: &'static str, doc: &'static str) -> Column {
    Column { name, doc }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Table {
    pub columns: Vec<Column>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn new(columns: &[Column]) -> Self {
        Self { columns: columns.to_vec(), rows: Vec::new() }
    }

    pub fn index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    /// Values of one column, in row order.
    pub fn column(&self, name: &str) -> Vec<&Value> {
        match self.index(name) {
            Some(i) => self.rows.iter().map(|r| &r[i]).collect(),
            None => Vec::new(),
        }
    }

    pub fn rows_where<'a>(&'a self, name: &str, value: &'a Value) -> impl Iterator<Item = &'a Vec<Value>> + 'a {
        let i = self.index(name);
        self.rows.iter().filter(move |r| i.is_some_and(|i| &r[i] == value))
    }

    /// CSV preceded by one `# name: description` line per column.
    pub fn write_csv<W: Write>(&self, out: W) -> io::Result<()> {
        let mut out = out;
        for c in &self.columns {
            writeln!(out, "# {}: {}", c.name, c.doc)?;
        }
        let mut w = csv::Writer::from_writer(out);
        w.write_record(self.columns.iter().map(|c| c.name))?;
        for row in &self.rows {
            w.write_record(row.iter().map(ToString::to_string))?;
        }
        w.flush()
    }

    /// Whitespace-separated layout for gnuplot: booleans as 0/1, text and
    /// missing values as `NaN`.
    pub fn write_gnuplot<W: Write>(&self, mut out: W) -> io::Result<()> {
        let names: Vec<&str> = self.columns.iter().map(|c| c.name).collect();
        writeln!(out, "# {}", names.join(" "))?;
        for row in &self.rows {
            let cells: Vec<String> = row
                .iter()
                .map(|v| match v {
                    Value::Bool(b) => (*b as u8).to_string(),
                    Value::Int(_) | Value::UInt(_) | Value::Float(_) => v.to_string(),
                    _ => "NaN".into(),
                })
                .collect();
            writeln!(out, "{}", cells.join(" "))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_has_schema_header() {
        let mut t = Table::new(&[col("n", "vertices"), col("ok", "flag"), col("x", "value")]);
        t.rows.push(vec![12usize.into(), true.into(), Value::Missing]);
        t.rows.push(vec![12usize.into(), Value::from(None::<bool>), 0.5.into()]);
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "# n: vertices\n# ok: flag\n# x: value\nn,ok,x\n12,true,\n12,,0.5\n");
        let mut dat = Vec::new();
        t.write_gnuplot(&mut dat).unwrap();
        assert_eq!(String::from_utf8(dat).unwrap(), "# n ok x\n12 1 NaN\n12 NaN 0.5\n");
    }
}
