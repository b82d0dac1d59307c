use std::io::Write;

use serde_json::{Map, Number, Value};

use crate::error::{RcmError, Result};

/// Significant digits used for every real written to a report.
pub const SIGNIFICANT_DIGITS: usize = 10;

/// One report field. `Empty` is written as an empty CSV field or JSON null.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Empty,
    Int(u64),
    Real(f64),
    Bool(bool),
    Text(String),
}

impl Cell {
    pub fn opt_real(value: Option<f64>) -> Cell {
        value.map_or(Cell::Empty, Cell::Real)
    }

    pub fn opt_int(value: Option<u64>) -> Cell {
        value.map_or(Cell::Empty, Cell::Int)
    }

    pub fn text(value: impl Into<String>) -> Cell {
        Cell::Text(value.into())
    }

    fn render(&self) -> String {
        match self {
            Cell::Empty => String::new(),
            Cell::Int(v) => v.to_string(),
            Cell::Real(v) => format_real(*v),
            Cell::Bool(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }

    fn to_json(&self) -> Value {
        match self {
            Cell::Empty => Value::Null,
            Cell::Int(v) => Value::from(*v),
            Cell::Real(v) => format_real(*v)
                .parse::<f64>()
                .ok()
                .and_then(Number::from_f64)
                .map_or(Value::Null, Value::Number),
            Cell::Bool(v) => Value::Bool(*v),
            Cell::Text(s) => Value::String(s.clone()),
        }
    }
}

/// Formats like C's `%.10g`: fixed notation for decimal exponents in
/// `[-5, 10)`, scientific otherwise, trailing zeros removed.
pub fn format_real(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.into();
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    if (-5..SIGNIFICANT_DIGITS as i32).contains(&exp) {
        let decimals = (SIGNIFICANT_DIGITS as i32 - 1 - exp).max(0) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        format!("{}e{exp}", trim_zeros(mantissa.to_string()))
    }
}

fn trim_zeros(s: String) -> String {
    if !s.contains('.') {
        return s;
    }
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub cells: Vec<Cell>,
}

/// A fixed column set, its rows in config order, and the metadata block
/// that accompanies them in every output format.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub metadata: Vec<(String, Cell)>,
    pub columns: Vec<&'static str>,
    pub rows: Vec<ReportRow>,
}

impl Report {
    pub fn new(metadata: Vec<(String, Cell)>, columns: Vec<&'static str>) -> Self {
        Report {
            metadata,
            columns,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, cells: Vec<Cell>) {
        assert_eq!(cells.len(), self.columns.len(), "row width");
        self.rows.push(ReportRow { cells });
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| *c == name)
    }

    /// Metadata as `# key=value` lines, then a header row and data rows.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        for (key, value) in &self.metadata {
            writeln!(out, "# {key}={}", value.render())?;
        }
        let mut writer = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(out);
        let csv_err = |e: csv::Error| RcmError::Io(e.to_string());
        writer.write_record(&self.columns).map_err(csv_err)?;
        for row in &self.rows {
            writer
                .write_record(row.cells.iter().map(Cell::render))
                .map_err(csv_err)?;
        }
        writer.flush()?;
        Ok(())
    }

    pub fn to_json(&self) -> Value {
        let metadata: Map<String, Value> = self
            .metadata
            .iter()
            .map(|(k, v)| (k.clone(), v.to_json()))
            .collect();
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|row| {
                let obj: Map<String, Value> = self
                    .columns
                    .iter()
                    .zip(&row.cells)
                    .map(|(c, v)| (c.to_string(), v.to_json()))
                    .collect();
                Value::Object(obj)
            })
            .collect();
        let mut root = Map::new();
        root.insert("metadata".into(), Value::Object(metadata));
        root.insert(
            "columns".into(),
            Value::Array(self.columns.iter().map(|c| Value::from(*c)).collect()),
        );
        root.insert("rows".into(), Value::Array(rows));
        Value::Object(root)
    }

    pub fn write_json<W: Write>(&self, mut out: W) -> Result<()> {
        serde_json::to_writer_pretty(&mut out, &self.to_json()).map_err(|e| RcmError::Io(e.to_string()))?;
        out.write_all(b"\n")?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn real_formatting() {
        assert_eq!(format_real(0.0), "0");
        assert_eq!(format_real(1.0), "1");
        assert_eq!(format_real(0.15), "0.15");
        assert_eq!(format_real(0.1 + 0.2), "0.3");
        assert_eq!(format_real(2.0 / 3.0), "0.6666666667");
        assert_eq!(format_real(-1234.5), "-1234.5");
        assert_eq!(format_real(9.99999999999), "10");
        assert_eq!(format_real(1e-7), "1e-7");
        assert_eq!(format_real(1.2676506002282294e30), "1.2676506e30");
        assert_eq!(format_real(0.000123456789012), "0.000123456789");
        assert_eq!(format_real(f64::NAN), "nan");
    }

    #[test]
    fn csv_layout() {
        let mut r = Report::new(vec![("tool".into(), Cell::text("rcm"))], vec!["a", "b", "c"]);
        r.push(vec![Cell::Int(3), Cell::Empty, Cell::text("x,y")]);
        r.push(vec![Cell::Real(0.5), Cell::Bool(true), Cell::text("plain")]);
        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "# tool=rcm\na,b,c\n3,,\"x,y\"\n0.5,true,plain\n"
        );
    }

    #[test]
    fn json_keeps_column_order_and_nulls() {
        let mut r = Report::new(vec![], vec!["zeta", "alpha"]);
        r.push(vec![Cell::Empty, Cell::Real(0.25)]);
        let text = serde_json::to_string(&r.to_json()).unwrap();
        assert!(text.contains(r#"{"zeta":null,"alpha":0.25}"#), "{text}");
    }
}
