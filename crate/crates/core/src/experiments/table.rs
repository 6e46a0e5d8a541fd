use std::fmt;
use std::io::Write;

use crate::error::{Error, Result};

/// One CSV field. Numbers are written with 17 significant digits.
#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Num(f64),
    Text(String),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_owned())
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cell::Num(v) => write!(f, "{v:.16e}"),
            Cell::Text(s) => f.write_str(s),
        }
    }
}

/// Rectangular table with a header row and finite numeric cells.
#[derive(Clone, Debug, PartialEq)]
pub struct CsvTable {
    header: Vec<String>,
    rows: Vec<Vec<Cell>>,
}

impl CsvTable {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Self {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push_row(&mut self, row: Vec<Cell>) -> Result<()> {
        if row.len() != self.header.len() {
            return Err(Error::Dimension(format!(
                "row has {} cells, header has {}",
                row.len(),
                self.header.len()
            )));
        }
        for (cell, name) in row.iter().zip(&self.header) {
            if let Cell::Num(v) = cell {
                if !v.is_finite() {
                    return Err(Error::Numerical(format!("non-finite value in column {name:?}")));
                }
            }
        }
        self.rows.push(row);
        Ok(())
    }

    /// Appends all rows of a table with the same header.
    pub fn extend(&mut self, other: CsvTable) -> Result<()> {
        if other.header != self.header {
            return Err(Error::Validation(format!(
                "cannot append table with header {:?} to {:?}",
                other.header, self.header
            )));
        }
        self.rows.extend(other.rows);
        Ok(())
    }

    pub fn header(&self) -> &[String] {
        &self.header
    }

    pub fn rows(&self) -> &[Vec<Cell>] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    fn column_index(&self, name: &str) -> Result<usize> {
        self.header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Validation(format!("table has no column {name:?}")))
    }

    /// Numeric column by name.
    pub fn column(&self, name: &str) -> Result<Vec<f64>> {
        let idx = self.column_index(name)?;
        self.rows
            .iter()
            .map(|r| match &r[idx] {
                Cell::Num(v) => Ok(*v),
                Cell::Text(_) => Err(Error::Validation(format!("column {name:?} is not numeric"))),
            })
            .collect()
    }

    /// Rows whose text column `name` equals `value`.
    pub fn filter_text(&self, name: &str, value: &str) -> Result<CsvTable> {
        let idx = self.column_index(name)?;
        Ok(Self {
            header: self.header.clone(),
            rows: self
                .rows
                .iter()
                .filter(|r| matches!(&r[idx], Cell::Text(s) if s == value))
                .cloned()
                .collect(),
        })
    }

    /// Rows whose numeric column `name` equals `value` exactly.
    pub fn filter_num(&self, name: &str, value: f64) -> Result<CsvTable> {
        let idx = self.column_index(name)?;
        Ok(Self {
            header: self.header.clone(),
            rows: self
                .rows
                .iter()
                .filter(|r| matches!(r[idx], Cell::Num(v) if v == value))
                .cloned()
                .collect(),
        })
    }

    /// UTF-8, comma separated, header first, LF line endings.
    pub fn write_to<W: Write>(&self, out: W) -> std::result::Result<(), csv::Error> {
        let mut writer = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(out);
        writer.write_record(&self.header)?;
        for row in &self.rows {
            writer.write_record(row.iter().map(|c| c.to_string()))?;
        }
        writer.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_to(&mut buf).expect("writing to memory cannot fail");
        String::from_utf8(buf).expect("cells are UTF-8")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_layout() {
        let mut t = CsvTable::new(["variant", "x"]);
        t.push_row(vec!["single".into(), (1.0 / 3.0).into()]).unwrap();
        t.push_row(vec!["osc_spin".into(), 0.1.into()]).unwrap();
        let s = t.to_csv_string();
        assert_eq!(
            s,
            "variant,x\nsingle,3.3333333333333331e-1\nosc_spin,1.0000000000000001e-1\n"
        );
        assert!(!s.contains('\r'));
    }

    #[test]
    fn numbers_round_trip() {
        for v in [1.0 / 3.0, -2.5e-17, 12345.678901234567, f64::MIN_POSITIVE, 0.1 + 0.2] {
            let text = Cell::Num(v).to_string();
            assert_eq!(text.parse::<f64>().unwrap(), v, "{text}");
        }
    }

    #[test]
    fn rejects_ragged_and_non_finite_rows() {
        let mut t = CsvTable::new(["a", "b"]);
        assert!(t.push_row(vec![1.0.into()]).is_err());
        assert!(t.push_row(vec![1.0.into(), f64::NAN.into()]).is_err());
        assert!(t.is_empty());
    }

    #[test]
    fn columns_and_filters() {
        let mut t = CsvTable::new(["v", "x"]);
        t.push_row(vec!["a".into(), 1.0.into()]).unwrap();
        t.push_row(vec!["b".into(), 2.0.into()]).unwrap();
        t.push_row(vec!["a".into(), 3.0.into()]).unwrap();
        assert_eq!(t.filter_text("v", "a").unwrap().column("x").unwrap(), vec![1.0, 3.0]);
        assert_eq!(t.filter_num("x", 2.0).unwrap().len(), 1);
        assert!(t.column("v").is_err());
        assert!(t.column("missing").is_err());
    }
}
