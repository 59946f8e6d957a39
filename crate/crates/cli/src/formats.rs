//! JSON file formats. Complex numbers are `[re, im]` pairs; matrices are
//! row-major lists of rows. Unknown keys are rejected.
//!
//! Numbers are written in the shortest form that parses back to the same
//! `f64`, so a write/read cycle reproduces every entry bit for bit.

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use usd_kit::{ComplexMatrix, PovmSet, C64};

use crate::error::CliError;

pub type Entry = [f64; 2];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixFile {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<Vec<Entry>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleFile {
    pub dim: usize,
    pub states: Vec<Vec<Entry>>,
    pub priors: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PovmFile {
    pub dim: usize,
    pub operators: Vec<Vec<Vec<Entry>>>,
}

fn parse_error(path: &Path, message: impl Into<String>) -> CliError {
    CliError::parse(message, json!({ "file": path.display().to_string() }))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, &e))?;
    serde_json::from_str(&text).map_err(|e| parse_error(path, e.to_string()))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).expect("plain data serializes");
    text.push('\n');
    fs::write(path, text).map_err(|e| CliError::io(path, &e))
}

pub fn to_c64(e: &Entry) -> C64 {
    C64::new(e[0], e[1])
}

pub fn entry(z: C64) -> Entry {
    [z.re, z.im]
}

pub fn vector_json(v: &[C64]) -> Value {
    json!(v.iter().map(|&z| entry(z)).collect::<Vec<_>>())
}

pub fn matrix_data(m: &ComplexMatrix) -> Vec<Vec<Entry>> {
    (0..m.rows())
        .map(|r| m.row(r).into_iter().map(entry).collect())
        .collect()
}

pub fn matrix_json(m: &ComplexMatrix) -> Value {
    json!(MatrixFile::from(m))
}

/// Builds a matrix from row data, checking that every row has `cols`
/// finite entries.
fn matrix_from_data(data: &[Vec<Entry>], rows: usize, cols: usize, what: &str) -> Result<ComplexMatrix, String> {
    if data.len() != rows {
        return Err(format!("{what}: expected {rows} rows, found {}", data.len()));
    }
    let mut flat = Vec::with_capacity(rows * cols);
    for (r, row) in data.iter().enumerate() {
        if row.len() != cols {
            return Err(format!("{what}: row {r} has {} entries, expected {cols}", row.len()));
        }
        for (c, e) in row.iter().enumerate() {
            if !(e[0].is_finite() && e[1].is_finite()) {
                return Err(format!("{what}: entry ({r}, {c}) is not finite"));
            }
            flat.push(to_c64(e));
        }
    }
    ComplexMatrix::new(rows, cols, flat).map_err(|e| format!("{what}: {e}"))
}

impl From<&ComplexMatrix> for MatrixFile {
    fn from(m: &ComplexMatrix) -> Self {
        MatrixFile {
            rows: m.rows(),
            cols: m.cols(),
            data: matrix_data(m),
        }
    }
}

impl MatrixFile {
    pub fn load(path: &Path) -> Result<ComplexMatrix, CliError> {
        let f: MatrixFile = read_json(path)?;
        if f.rows == 0 || f.cols == 0 {
            return Err(parse_error(path, "matrix must have at least one row and column"));
        }
        matrix_from_data(&f.data, f.rows, f.cols, "matrix").map_err(|m| parse_error(path, m))
    }
}

impl EnsembleFile {
    /// Returns the states as columns of a `dim × L` matrix, plus the priors.
    pub fn load(path: &Path) -> Result<(ComplexMatrix, Vec<f64>), CliError> {
        let f: EnsembleFile = read_json(path)?;
        if f.dim == 0 || f.states.is_empty() {
            return Err(parse_error(path, "ensemble needs dim > 0 and at least one state"));
        }
        if f.priors.len() != f.states.len() {
            return Err(parse_error(
                path,
                format!("{} states but {} priors", f.states.len(), f.priors.len()),
            ));
        }
        // states are stored one per row; transpose into columns
        let m = matrix_from_data(&f.states, f.states.len(), f.dim, "states").map_err(|m| parse_error(path, m))?;
        let columns: Vec<Vec<C64>> = (0..m.rows()).map(|r| m.row(r)).collect();
        let states = ComplexMatrix::from_columns(&columns).map_err(|e| parse_error(path, e.to_string()))?;
        if f.priors.iter().any(|p| !p.is_finite()) {
            return Err(parse_error(path, "priors must be finite"));
        }
        Ok((states, f.priors))
    }
}

impl From<&PovmSet> for PovmFile {
    fn from(p: &PovmSet) -> Self {
        PovmFile {
            dim: p.dim(),
            operators: p.operators().iter().map(matrix_data).collect(),
        }
    }
}

impl PovmFile {
    /// Parses the operators without judging whether they form a valid POVM.
    pub fn load(path: &Path) -> Result<PovmSet, CliError> {
        let f: PovmFile = read_json(path)?;
        if f.dim == 0 || f.operators.len() < 2 {
            return Err(parse_error(path, "POVM needs dim > 0 and at least two operators"));
        }
        let operators = f
            .operators
            .iter()
            .enumerate()
            .map(|(i, data)| matrix_from_data(data, f.dim, f.dim, &format!("operator {}", i + 1)))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|m| parse_error(path, m))?;
        PovmSet::from_operators(operators).map_err(|e| parse_error(path, e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn entry_layout_is_re_im() {
        let m = ComplexMatrix::new(1, 2, vec![C64::new(1.0, -2.0), C64::new(0.5, 0.0)]).unwrap();
        assert_eq!(matrix_data(&m), vec![vec![[1.0, -2.0], [0.5, 0.0]]]);
    }

    #[test]
    fn unknown_keys_rejected() {
        let err = serde_json::from_str::<MatrixFile>(r#"{"rows":1,"cols":1,"data":[[[1,0]]],"extra":0}"#);
        assert!(err.is_err());
    }

    #[test]
    fn ragged_rows_rejected() {
        let data = vec![vec![[1.0, 0.0]], vec![[1.0, 0.0], [2.0, 0.0]]];
        assert!(matrix_from_data(&data, 2, 2, "m").is_err());
    }

    #[test]
    fn awkward_floats_round_trip() {
        let vals = [
            0.1 + 0.2,
            1.0 / 3.0,
            f64::MIN_POSITIVE,
            -1e-300,
            0.632_455_532_033_675_9,
        ];
        for v in vals {
            let text = serde_json::to_string(&[v, -v]).unwrap();
            let back: Entry = serde_json::from_str(&text).unwrap();
            assert_eq!(back[0].to_bits(), v.to_bits());
            assert_eq!(back[1].to_bits(), (-v).to_bits());
        }
    }
}
