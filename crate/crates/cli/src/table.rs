//! Columnar result tables and their deterministic CSV encoding.

use anyhow::{Context, Result, bail};

/// One table cell. Floats render with 17 significant digits so the CSV
/// round-trips bit-exactly.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) => format!("{v:.16e}"),
            Cell::Text(s) => s.clone(),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<i64> for Cell {
    fn from(v: i64) -> Self {
        Cell::Int(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.into())
    }
}

/// Named columnar table with equal-length rows.
#[derive(Debug, Clone)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Self::with_columns(name, columns.iter().map(|c| c.to_string()).collect())
    }

    pub fn with_columns(name: &str, columns: Vec<String>) -> Self {
        Self { name: name.into(), columns, rows: Vec::new() }
    }

    pub fn push_row(&mut self, row: Vec<Cell>) {
        self.rows.push(row);
    }

    /// RFC-4180 CSV bytes: header row, LF line endings, '.' decimals.
    pub fn to_csv(&self) -> Result<Vec<u8>> {
        for (i, row) in self.rows.iter().enumerate() {
            if row.len() != self.columns.len() {
                bail!(
                    "table '{}': row {i} has {} cells for {} columns",
                    self.name,
                    row.len(),
                    self.columns.len()
                );
            }
        }
        let mut writer = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        writer.write_record(&self.columns)?;
        for row in &self.rows {
            writer.write_record(row.iter().map(Cell::render))?;
        }
        writer
            .into_inner()
            .with_context(|| format!("flushing CSV for table '{}'", self.name))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_only_for_empty_table() {
        let t = Table::new("empty", &["a", "b"]);
        assert_eq!(t.to_csv().unwrap(), b"a,b\n");
    }

    #[test]
    fn rejects_ragged_rows() {
        let mut t = Table::new("bad", &["a", "b"]);
        t.push_row(vec![Cell::Int(1)]);
        assert!(t.to_csv().is_err());
    }

    #[test]
    fn floats_roundtrip_exactly() {
        let values = [
            0.1,
            -3.5601234567890123e6,
            f64::MIN_POSITIVE,
            1.0 / 3.0,
            5.82e9,
        ];
        let mut t = Table::new("floats", &["x"]);
        for &v in &values {
            t.push_row(vec![Cell::Float(v)]);
        }
        let bytes = t.to_csv().unwrap();
        let text = String::from_utf8(bytes).unwrap();
        for (line, &want) in text.lines().skip(1).zip(&values) {
            let parsed: f64 = line.parse().unwrap();
            assert_eq!(parsed.to_bits(), want.to_bits(), "{line}");
        }
    }

    #[test]
    fn quoting_follows_rfc4180() {
        let mut t = Table::new("quoted", &["label", "v"]);
        t.push_row(vec![Cell::Text("plain".into()), Cell::Int(1)]);
        t.push_row(vec![Cell::Text("with,comma".into()), Cell::Int(2)]);
        t.push_row(vec![Cell::Text("with \"quote\"".into()), Cell::Int(3)]);
        let text = String::from_utf8(t.to_csv().unwrap()).unwrap();
        assert!(text.contains("\"with,comma\""));
        assert!(text.contains("\"with \"\"quote\"\"\""));
        assert!(text.ends_with('\n'));
        assert!(!text.contains('\r'));
    }
}
