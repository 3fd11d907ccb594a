//! Matrix files: JSON `{"dim": d, "entries": [[...], ...]}` with `2d × 2d` row-major entries,
//! and CSV with one row per line in `%.17g`.

use std::io::{BufRead, Write};
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::util::fmt_g17;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixDoc {
    pub dim: usize,
    pub entries: Vec<Vec<f64>>,
}

impl MatrixDoc {
    pub fn from_matrix(m: &DMatrix<f64>) -> Self {
        Self {
            dim: m.nrows() / 2,
            entries: (0..m.nrows())
                .map(|i| m.row(i).iter().copied().collect())
                .collect(),
        }
    }

    pub fn to_matrix(&self, source: &str) -> Result<DMatrix<f64>> {
        let n = 2 * self.dim;
        if self.dim == 0 || self.entries.len() != n || self.entries.iter().any(|r| r.len() != n) {
            return Err(Error::Parse {
                field: format!("{source}: entries"),
                msg: format!("expected {n} rows of {n} numbers for dim = {}", self.dim),
            });
        }
        Ok(DMatrix::from_fn(n, n, |i, j| self.entries[i][j]))
    }
}

pub fn matrix_to_json(m: &DMatrix<f64>) -> Result<String> {
    Ok(serde_json::to_string_pretty(&MatrixDoc::from_matrix(m))?)
}

pub fn matrix_from_json(text: &str, source: &str) -> Result<DMatrix<f64>> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let doc: MatrixDoc = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let field = if path == "." {
            source.to_string()
        } else {
            format!("{source}: {path}")
        };
        Error::Parse {
            field,
            msg: e.into_inner().to_string(),
        }
    })?;
    doc.to_matrix(source)
}

pub fn write_matrix_csv(m: &DMatrix<f64>, w: &mut impl Write) -> Result<()> {
    for i in 0..m.nrows() {
        let row: Vec<String> = m.row(i).iter().map(|&x| fmt_g17(x)).collect();
        writeln!(w, "{}", row.join(","))?;
    }
    Ok(())
}

pub fn read_matrix_csv(r: impl BufRead, source: &str) -> Result<DMatrix<f64>> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (k, line) in r.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let row = line
            .split(',')
            .map(|t| t.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::Parse {
                field: format!("{source}: line {}", k + 1),
                msg: e.to_string(),
            })?;
        rows.push(row);
    }
    let n = rows.len();
    if n == 0 || n % 2 != 0 {
        return Err(Error::Parse {
            field: source.into(),
            msg: format!("expected an even, nonzero row count (got {n})"),
        });
    }
    MatrixDoc {
        dim: n / 2,
        entries: rows,
    }
    .to_matrix(source)
}

/// Reads a matrix from `.json` or `.csv`.
pub fn load_matrix(path: &Path) -> Result<DMatrix<f64>> {
    let source = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{source}: {e}")))?;
    match path.extension().and_then(|e| e.to_str()) {
        Some("csv") => read_matrix_csv(text.as_bytes(), &source),
        _ => matrix_from_json(&text, &source),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> DMatrix<f64> {
        DMatrix::from_row_slice(2, 2, &[0.1, -1.0 / 3.0, 2.0f64.sqrt(), 1e-300])
    }

    #[test]
    fn json_round_trip_is_exact() {
        let m = sample();
        let text = matrix_to_json(&m).unwrap();
        assert!(text.contains("\"dim\": 1"));
        assert_eq!(matrix_from_json(&text, "mem").unwrap(), m);
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let m = sample();
        let mut buf = Vec::new();
        write_matrix_csv(&m, &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf.clone())
                .unwrap()
                .lines()
                .next()
                .unwrap(),
            "0.10000000000000001,-0.33333333333333331"
        );
        assert_eq!(read_matrix_csv(&buf[..], "mem").unwrap(), m);
    }

    #[test]
    fn malformed_inputs_name_the_field() {
        match matrix_from_json(r#"{"dim": 2, "entries": [[1, 0], [0, 1]]}"#, "S.json") {
            Err(Error::Parse { field, .. }) => assert_eq!(field, "S.json: entries"),
            other => panic!("{other:?}"),
        }
        match read_matrix_csv("1,0\n0,x\n".as_bytes(), "S.csv") {
            Err(Error::Parse { field, .. }) => assert_eq!(field, "S.csv: line 2"),
            other => panic!("{other:?}"),
        }
    }
}
