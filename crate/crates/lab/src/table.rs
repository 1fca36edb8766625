//! CSV tables with shortest round-trip float formatting and `inf` for
//! infinities.

use std::path::Path;

use crate::error::{LabError, Result};

/// Shortest string that parses back to the same `f64`.
pub fn fmt_f64(v: f64) -> String {
    if v == f64::INFINITY {
        "inf".into()
    } else if v == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{v}")
    }
}

pub fn parse_f64(s: &str) -> Option<f64> {
    match s {
        "inf" => Some(f64::INFINITY),
        "-inf" => Some(f64::NEG_INFINITY),
        _ => s.parse().ok(),
    }
}

pub fn fmt_opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn push_f64(&mut self, row: &[f64]) {
        self.push(row.iter().map(|&v| fmt_f64(v)).collect());
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_path(path)?;
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        let mut r = csv::Reader::from_path(path)?;
        let header = r.headers()?.iter().map(str::to_string).collect();
        let rows = r
            .records()
            .map(|rec| rec.map(|rec| rec.iter().map(str::to_string).collect()))
            .collect::<std::result::Result<_, _>>()?;
        Ok(Table { header, rows })
    }

    pub fn col_index(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    /// Errors with the missing column names unless all are present.
    pub fn require(&self, path: &str, cols: &[&str]) -> Result<()> {
        let missing: Vec<&str> = cols.iter().copied().filter(|c| self.col_index(c).is_none()).collect();
        if missing.is_empty() {
            Ok(())
        } else {
            Err(LabError::Schema {
                path: path.into(),
                reason: format!("missing columns {missing:?}"),
            })
        }
    }

    /// Numeric column; empty cells become `None`.
    pub fn column(&self, name: &str) -> Result<Vec<Option<f64>>> {
        let i = self.col_index(name).ok_or_else(|| LabError::Schema {
            path: String::new(),
            reason: format!("missing column `{name}`"),
        })?;
        self.rows
            .iter()
            .map(|r| {
                let cell = r[i].as_str();
                if cell.is_empty() {
                    Ok(None)
                } else {
                    parse_f64(cell).map(Some).ok_or_else(|| LabError::Schema {
                        path: String::new(),
                        reason: format!("`{cell}` in column `{name}` is not a number"),
                    })
                }
            })
            .collect()
    }

    /// Numeric column with every cell present.
    pub fn column_f64(&self, name: &str) -> Result<Vec<f64>> {
        self.column(name)?
            .into_iter()
            .map(|v| {
                v.ok_or_else(|| LabError::Schema {
                    path: String::new(),
                    reason: format!("empty cell in column `{name}`"),
                })
            })
            .collect()
    }

    pub fn text_column(&self, name: &str) -> Result<Vec<&str>> {
        let i = self.col_index(name).ok_or_else(|| LabError::Schema {
            path: String::new(),
            reason: format!("missing column `{name}`"),
        })?;
        Ok(self.rows.iter().map(|r| r[i].as_str()).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64;

    #[test]
    fn floats_round_trip() {
        for v in [0.1, 1.0 / 3.0, f64::INFINITY, -2.5e-300, 5.0, f64::consts::LN_2] {
            assert_eq!(parse_f64(&fmt_f64(v)), Some(v));
        }
        assert_eq!(fmt_f64(f64::INFINITY), "inf");
        assert_eq!(fmt_f64(5.0), "5");
    }

    #[test]
    fn write_then_read() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        let mut t = Table::new(&["a", "b"]);
        t.push_f64(&[1.0, f64::INFINITY]);
        t.push(vec!["2".into(), String::new()]);
        t.write(&path).unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), "a,b\n1,inf\n2,\n");
        let back = Table::read(&path).unwrap();
        assert_eq!(back, t);
        assert_eq!(back.column("b").unwrap(), vec![Some(f64::INFINITY), None]);
        assert!(back.column_f64("b").is_err());
        assert!(back.require("t.csv", &["a", "c"]).is_err());
    }
}
