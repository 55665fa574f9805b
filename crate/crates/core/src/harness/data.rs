//! Datasets as header-less CSV (`a` columns, then `b` columns) and
//! parameter vectors as JSON.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    in_dim: usize,
    out_dim: usize,
    rows: Vec<(Vec<f64>, Vec<f64>)>,
}

impl Dataset {
    pub fn new(in_dim: usize, out_dim: usize, rows: Vec<(Vec<f64>, Vec<f64>)>) -> Result<Self> {
        for (k, (a, b)) in rows.iter().enumerate() {
            crate::error::check_dim(&format!("dataset row {} input", k + 1), in_dim, a.len())?;
            crate::error::check_dim(&format!("dataset row {} target", k + 1), out_dim, b.len())?;
            crate::error::check_finite(&format!("dataset row {}", k + 1), a)?;
            crate::error::check_finite(&format!("dataset row {}", k + 1), b)?;
        }
        Ok(Dataset { in_dim, out_dim, rows })
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    pub fn rows(&self) -> &[(Vec<f64>, Vec<f64>)] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn parse_csv(text: &str, in_dim: usize, out_dim: usize) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .flexible(true)
            .from_reader(text.as_bytes());
        let width = in_dim + out_dim;
        let mut rows = Vec::new();
        for record in reader.records() {
            let record = record?;
            let line = record.position().map_or(0, |p| p.line());
            if record.len() != width {
                return Err(Error::InvalidArgument(format!(
                    "line {line}: expected {width} columns ({in_dim} input, {out_dim} target), found {}",
                    record.len()
                )));
            }
            let values = record
                .iter()
                .map(|field| match field.parse::<f64>() {
                    Ok(v) if v.is_finite() => Ok(v),
                    _ => Err(Error::InvalidArgument(format!("line {line}: `{field}` is not a finite number"))),
                })
                .collect::<Result<Vec<f64>>>()?;
            rows.push((values[..in_dim].to_vec(), values[in_dim..].to_vec()));
        }
        Dataset::new(in_dim, out_dim, rows)
    }

    pub fn from_csv_file(path: &Path, in_dim: usize, out_dim: usize) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Dataset::parse_csv(&text, in_dim, out_dim).map_err(|e| Error::Parse {
            path: path.display().to_string(),
            message: e.to_string(),
        })
    }

    /// One line per row; floats in shortest round-trip form.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for (a, b) in &self.rows {
            let fields: Vec<String> = a.iter().chain(b).map(f64::to_string).collect();
            out.push_str(&fields.join(","));
            out.push('\n');
        }
        out
    }
}

/// `{"params": [...]}`, as written by `train --out` and read by `request`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsFile {
    pub params: Vec<f64>,
}

impl ParamsFile {
    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let file: ParamsFile = serde_json::from_str(&text).map_err(|e| Error::Parse {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        crate::error::check_finite(&format!("parameters in {}", path.display()), &file.params)?;
        Ok(file)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)? + "\n")?;
        Ok(())
    }
}

/// Comma-separated numbers, as given on the command line.
pub fn parse_vector(text: &str) -> Result<Vec<f64>> {
    if text.trim().is_empty() {
        return Ok(Vec::new());
    }
    text.split(',')
        .map(|s| {
            let s = s.trim();
            match s.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                _ => Err(Error::InvalidArgument(format!("`{s}` is not a finite number"))),
            }
        })
        .collect()
}
