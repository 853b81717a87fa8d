//! Column-addressed CSV tables.

use std::path::Path;

use anyhow::{anyhow, Context, Result};

pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<csv::StringRecord>,
    pub source: String,
}

impl Table {
    pub fn read(path: &Path) -> Result<Table> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .from_path(path)
            .with_context(|| format!("opening {}", path.display()))?;
        let header = reader.headers()?.iter().map(str::to_string).collect();
        let rows = reader
            .records()
            .collect::<Result<Vec<_>, _>>()
            .with_context(|| format!("reading {}", path.display()))?;
        Ok(Table {
            header,
            rows,
            source: path.display().to_string(),
        })
    }

    pub fn column(&self, name: &str) -> Result<usize> {
        self.header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| anyhow!("{} has no column `{name}`", self.source))
    }

    pub fn has(&self, name: &str) -> bool {
        self.header.iter().any(|h| h == name)
    }

    /// Parses column `col` of every row; the error names row and column.
    pub fn reals(&self, col: usize) -> Result<Vec<f64>> {
        self.rows
            .iter()
            .enumerate()
            .map(|(r, row)| parse_real(&row[col]).with_context(|| self.at(r, col)))
            .collect()
    }

    pub fn at(&self, row: usize, col: usize) -> String {
        format!(
            "{} line {}, column `{}`",
            self.source,
            row + 2,
            self.header[col]
        )
    }
}

/// Empty fields read as NaN.
pub fn parse_real(s: &str) -> Result<f64> {
    if s.is_empty() {
        return Ok(f64::NAN);
    }
    s.parse::<f64>()
        .map_err(|_| anyhow!("cannot parse {s:?} as a number"))
}
