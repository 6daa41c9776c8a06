//! Table rendering: CSV with a fixed 12-significant-digit float format and
//! JSON with sorted keys, both stable byte-for-byte across runs.

use std::collections::BTreeMap;

/// One table cell; integers and floats render differently in CSV.
#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Int(i64),
    Num(f64),
    Bool(bool),
    Text(String),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Num(v) => sig12(*v),
            Cell::Bool(b) => b.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> serde_json::Value {
        match self {
            Cell::Int(v) => (*v).into(),
            Cell::Num(v) => (*v).into(),
            Cell::Bool(b) => (*b).into(),
            Cell::Text(s) => s.as_str().into(),
        }
    }
}

/// Scientific notation with 12 significant digits and `.` as the decimal
/// separator, e.g. `-3.16992500144e0`.
pub fn sig12(v: f64) -> String {
    format!("{:.11e}", v)
}

/// Ordered experiment output: named columns, rows, and summary scalars.
/// The summary appears in JSON output only; CSV is exactly header + rows.
#[derive(Clone, Debug)]
pub struct Table {
    pub name: String,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
    pub summary: BTreeMap<String, f64>,
}

impl Table {
    pub fn new(name: &str, columns: &[&'static str]) -> Self {
        Table {
            name: name.to_string(),
            columns: columns.to_vec(),
            rows: Vec::new(),
            summary: BTreeMap::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width mismatch in {}", self.name);
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let line: Vec<String> = row.iter().map(Cell::csv).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> String {
        let rows: Vec<Vec<serde_json::Value>> =
            self.rows.iter().map(|r| r.iter().map(Cell::json).collect()).collect();
        let obj = serde_json::json!({
            "experiment": self.name,
            "columns": self.columns,
            "rows": rows,
            "summary": self.summary,
        });
        let mut s = serde_json::to_string_pretty(&obj).expect("table serializes");
        s.push('\n');
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_is_header_plus_rows_with_lf() {
        let mut t = Table::new("demo", &["d", "value", "ok"]);
        t.push(vec![Cell::Int(3), Cell::Num(-2.0 * 3.0f64.log2()), Cell::Bool(true)]);
        let csv = t.to_csv();
        assert_eq!(csv, "d,value,ok\n3,-3.16992500144e0,true\n");
    }

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(sig12(1.0), "1.00000000000e0");
        assert_eq!(sig12(0.04337), "4.33700000000e-2");
        assert_eq!(sig12(-123456.789), "-1.23456789000e5");
    }

    #[test]
    fn json_contains_summary_and_columns() {
        let mut t = Table::new("demo", &["x"]);
        t.push(vec![Cell::Num(0.5)]);
        t.summary.insert("bound".into(), 0.8);
        let json = t.to_json();
        assert!(json.contains("\"experiment\": \"demo\""));
        assert!(json.contains("\"bound\": 0.8"));
        assert!(json.ends_with('\n'));
    }
}
