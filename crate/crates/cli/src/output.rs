//! CSV and JSON writers. CSV numbers carry 12 significant digits; every file
//! starts with `#` metadata lines.

use std::fmt::Write as _;

use serde_json::{json, Map, Value};

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Num(f64),
    Text(String),
    Bool(bool),
    Empty,
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(v) => format!("{v:.11e}"),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(v) => num(*v),
            Cell::Text(s) => json!(s),
            Cell::Bool(b) => json!(b),
            Cell::Empty => Value::Null,
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.into())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

/// JSON number, with infinities as strings.
pub fn num(v: f64) -> Value {
    if v.is_finite() {
        json!(v)
    } else if v.is_nan() {
        json!("nan")
    } else if v > 0.0 {
        json!("inf")
    } else {
        json!("-inf")
    }
}

#[derive(Clone, Debug, Default)]
pub struct Meta {
    pub command: String,
    pub config_sha256: String,
    pub seed: u64,
    pub samples: u64,
    pub excluded: u64,
    /// Further `key: value` lines, in order.
    pub extra: Vec<(String, String)>,
}

impl Meta {
    fn lines(&self) -> Vec<(String, String)> {
        let mut v = vec![
            ("tool".into(), format!("pairkey {}", env!("CARGO_PKG_VERSION"))),
            ("command".into(), self.command.clone()),
            ("config_sha256".into(), self.config_sha256.clone()),
            ("seed".into(), self.seed.to_string()),
            ("samples".into(), self.samples.to_string()),
            ("excluded".into(), self.excluded.to_string()),
            ("log_base".into(), "2".into()),
            ("units".into(), "rates in bits per slot".into()),
        ];
        v.extend(self.extra.iter().cloned());
        v
    }
}

#[derive(Clone, Debug, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

pub fn render_csv(meta: &Meta, table: &Table) -> String {
    let mut s = String::new();
    for (k, v) in meta.lines() {
        let _ = writeln!(s, "# {k}: {v}");
    }
    let _ = writeln!(s, "{}", table.columns.join(","));
    for row in &table.rows {
        let cells: Vec<String> = row.iter().map(Cell::csv).collect();
        let _ = writeln!(s, "{}", cells.join(","));
    }
    s
}

pub fn render_json(meta: &Meta, table: &Table, body: Option<Value>) -> String {
    let m: Map<String, Value> = meta.lines().into_iter().map(|(k, v)| (k, json!(v))).collect();
    let data = body.unwrap_or_else(|| {
        Value::Array(
            table
                .rows
                .iter()
                .map(|r| {
                    Value::Object(table.columns.iter().cloned().zip(r.iter().map(Cell::json)).collect())
                })
                .collect(),
        )
    });
    let mut s = serde_json::to_string_pretty(&json!({ "meta": m, "data": data })).expect("serializable");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(Cell::Num(0.1).csv(), "1.00000000000e-1");
        assert_eq!(Cell::Num(1.0 / 3.0).csv(), "3.33333333333e-1");
        assert_eq!(Cell::Num(f64::INFINITY).csv(), "inf");
    }

    #[test]
    fn csv_layout() {
        let mut t = Table::new(&["a", "b"]);
        t.push(vec![1.0.into(), true.into()]);
        let s = render_csv(&Meta::default(), &t);
        let lines: Vec<&str> = s.lines().collect();
        assert!(lines[0].starts_with("# tool: pairkey"));
        assert!(lines.contains(&"# log_base: 2"));
        assert_eq!(lines[lines.len() - 2], "a,b");
        assert_eq!(lines[lines.len() - 1], "1.00000000000e0,true");
    }

    #[test]
    fn json_rows_and_infinity() {
        let mut t = Table::new(&["x"]);
        t.push(vec![f64::INFINITY.into()]);
        let v: Value = serde_json::from_str(&render_json(&Meta::default(), &t, None)).unwrap();
        assert_eq!(v["data"][0]["x"], "inf");
        assert_eq!(v["meta"]["log_base"], "2");
    }
}
