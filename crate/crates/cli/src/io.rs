//! File formats: numeric CSV, group-structure and point-family JSON.

use std::fs;
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use sparselb::{GroupStructure, PointFamily, SupportSet};

use crate::CliError;

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

fn parse_cell(s: &str) -> Option<f64> {
    s.trim().parse::<f64>().ok()
}

/// Parses rectangular numeric CSV text into rows. A first row with any
/// non-numeric cell is taken as a header and skipped. Rows are reported
/// 1-based as they appear in the text.
pub fn parse_matrix_csv(text: &str) -> Result<Vec<Vec<f64>>, CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut width = None;
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| CliError::Config(format!("malformed CSV: {e}")))?;
        let row_no = line + 1;
        if record.iter().all(|c| c.is_empty()) {
            continue;
        }
        if line == 0 && record.iter().any(|c| parse_cell(c).is_none()) {
            width = Some(record.len());
            continue;
        }
        let mut row = Vec::with_capacity(record.len());
        for (col, cell) in record.iter().enumerate() {
            let v = parse_cell(cell).ok_or_else(|| {
                CliError::Config(format!("non-numeric cell {cell:?} at row {row_no}, column {}", col + 1))
            })?;
            row.push(v);
        }
        match width {
            Some(w) if w != row.len() => {
                return Err(CliError::Config(format!(
                    "ragged row {row_no}: {} columns, expected {w}",
                    row.len()
                )))
            }
            _ => width = Some(row.len()),
        }
        rows.push(row);
    }
    Ok(rows)
}

pub fn load_matrix_csv(path: &Path) -> Result<DMatrix<f64>, CliError> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let rows = parse_matrix_csv(&text).map_err(|e| prefix(path, e))?;
    if rows.is_empty() {
        return Err(CliError::Config(format!("{}: no data rows", path.display())));
    }
    let cols = rows[0].len();
    Ok(DMatrix::from_row_iterator(rows.len(), cols, rows.into_iter().flatten()))
}

/// A vector stored as one row or one column.
pub fn load_vector_csv(path: &Path) -> Result<Vec<f64>, CliError> {
    let m = load_matrix_csv(path)?;
    if m.nrows() != 1 && m.ncols() != 1 {
        return Err(CliError::Config(format!(
            "{}: expected a single row or column, got {} x {}",
            path.display(),
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(m.iter().copied().collect())
}

fn prefix(path: &Path, e: CliError) -> CliError {
    match e {
        CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
        other => other,
    }
}

/// Group structure with 1-based indices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupsFile {
    pub d: usize,
    pub groups: Vec<Vec<usize>>,
    pub weights: Vec<f64>,
}

impl GroupsFile {
    pub fn build(&self) -> Result<GroupStructure, CliError> {
        let sets = self
            .groups
            .iter()
            .map(|g| SupportSet::from_one_based(self.d, g))
            .collect::<sparselb::Result<Vec<_>>>()?;
        Ok(GroupStructure::new(self.d, sets, self.weights.clone())?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointFamilyFile {
    pub d: usize,
    pub sets: Vec<Vec<Vec<f64>>>,
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, CliError> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let de = &mut serde_json::Deserializer::from_str(&text);
    serde_path_to_error::deserialize(de)
        .map_err(|e| CliError::Config(format!("{}: invalid JSON at `{}`: {}", path.display(), e.path(), e.inner())))
}

pub fn load_group_structure(path: &Path) -> Result<GroupStructure, CliError> {
    read_json::<GroupsFile>(path)?.build()
}

pub fn load_point_family(path: &Path) -> Result<PointFamily, CliError> {
    let f: PointFamilyFile = read_json(path)?;
    Ok(PointFamily::new(f.d, f.sets)?)
}

/// Writes `text` to `path`, or to stdout when there is no path.
pub fn write_text(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| io_err(p, e)),
        None => {
            use std::io::Write;
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes()).map_err(|e| CliError::Io(format!("stdout: {e}")))
        }
    }
}
