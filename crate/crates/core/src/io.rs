//! Plain-text matrix files and the CSV layouts used for results.
//!
//! Matrix files hold one time sample per line. Reading accepts whitespace
//! or commas between fields; writing uses a single tab. Channel and
//! row indices in CSV output are 1-based.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use nalgebra::DMatrix;

use crate::connectivity::SpectralConnectivity;
use crate::error::{Error, Result};
use crate::types::TimeSeriesMatrix;

/// Parses matrix text of arbitrary shape.
pub fn parse_matrix(text: &str) -> Result<DMatrix<f64>> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut width = None;
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let row = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|t| !t.is_empty())
            .enumerate()
            .map(|(k, tok)| {
                tok.parse::<f64>().map_err(|_| Error::Parse {
                    line: lineno + 1,
                    field: k + 1,
                    msg: format!("not a number: {tok:?}"),
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        match width {
            None => width = Some(row.len()),
            Some(w) if w != row.len() => {
                return Err(Error::Parse {
                    line: lineno + 1,
                    field: row.len().min(w) + 1,
                    msg: format!("ragged row: {} fields, expected {w}", row.len()),
                })
            }
            _ => {}
        }
        rows.push(row);
    }
    let p = width.ok_or_else(|| Error::Empty("matrix file".into()))?;
    let n = rows.len();
    Ok(DMatrix::from_fn(n, p, |i, j| rows[i][j]))
}

/// Reads any matrix file without enforcing the time-series shape.
pub fn read_dmatrix(path: impl AsRef<Path>) -> Result<DMatrix<f64>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_matrix(&text)
}

pub fn read_matrix(path: impl AsRef<Path>) -> Result<TimeSeriesMatrix> {
    TimeSeriesMatrix::new(read_dmatrix(path)?)
}

/// Shortest representation that parses back to the same `f64`.
pub fn fmt_f64(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 || (1e-5..1e16).contains(&a) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

pub fn format_matrix(m: &DMatrix<f64>) -> String {
    let mut out = String::with_capacity(m.nrows() * m.ncols() * 20);
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            if j > 0 {
                out.push('\t');
            }
            out.push_str(&fmt_f64(m[(i, j)]));
        }
        out.push('\n');
    }
    out
}

pub fn write_matrix(m: &DMatrix<f64>, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, format_matrix(m)).map_err(|e| Error::io(path, e))
}

/// `row,col,value` with 1-based indices.
pub fn matrix_csv(m: &DMatrix<f64>) -> String {
    let mut out = String::from("row,col,value\n");
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let _ = writeln!(out, "{},{},{}", i + 1, j + 1, fmt_f64(m[(i, j)]));
        }
    }
    out
}

/// `lag,row,col,value` for a sequence of coefficient matrices, lags from 1.
pub fn lagged_csv(ms: &[DMatrix<f64>]) -> String {
    let mut out = String::from("lag,row,col,value\n");
    for (k, m) in ms.iter().enumerate() {
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                let _ = writeln!(out, "{},{},{},{}", k + 1, i + 1, j + 1, fmt_f64(m[(i, j)]));
            }
        }
    }
    out
}

/// `freq_hz,from,to,value`, one line per frequency and ordered off-diagonal pair.
/// Entry `(i, j)` of each matrix is read as the flow `j -> i`.
pub fn spectral_csv(s: &SpectralConnectivity) -> String {
    let mut out = String::from("freq_hz,from,to,value\n");
    let p = s.channels();
    for (f, m) in s.frequencies.iter().zip(&s.values) {
        for to in 0..p {
            for from in 0..p {
                if from != to {
                    let _ = writeln!(out, "{},{},{},{}", fmt_f64(*f), from + 1, to + 1, fmt_f64(m[(to, from)]));
                }
            }
        }
    }
    out
}

/// Parses the `value` column of either CSV layout, keyed by the other columns.
pub fn parse_csv_values(text: &str) -> Result<Vec<(String, f64)>> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| Error::Empty("CSV".into()))?;
    let value_col = header
        .split(',')
        .position(|h| h.trim() == "value")
        .ok_or_else(|| Error::Parse {
            line: 1,
            field: 1,
            msg: "missing value column".into(),
        })?;
    let mut out = Vec::new();
    for (lineno, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        let raw = fields.get(value_col).ok_or_else(|| Error::Parse {
            line: lineno + 1,
            field: value_col + 1,
            msg: "short row".into(),
        })?;
        let v = raw.trim().parse::<f64>().map_err(|_| Error::Parse {
            line: lineno + 1,
            field: value_col + 1,
            msg: format!("not a number: {raw:?}"),
        })?;
        let key: Vec<&str> = fields
            .iter()
            .enumerate()
            .filter(|(k, _)| *k != value_col)
            .map(|(_, f)| *f)
            .collect();
        out.push((key.join(","), v));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn lagged_layout() {
        let csv = lagged_csv(&[DMatrix::identity(2, 2), DMatrix::from_element(2, 2, 0.5)]);
        let v = parse_csv_values(&csv).unwrap();
        assert_eq!(v.len(), 8);
        assert_eq!(v[1], ("1,1,2".to_string(), 0.0));
        assert_eq!(v[7], ("2,2,2".to_string(), 0.5));
    }

    #[test]
    fn parses_whitespace_and_commas() {
        let m = parse_matrix("1 2\n3,4\n5\t6\n").unwrap();
        assert_eq!(m, DMatrix::from_row_slice(3, 2, &[1., 2., 3., 4., 5., 6.]));
        let z = parse_matrix("0\n0\n0").unwrap();
        assert_eq!(z, DMatrix::zeros(3, 1));
    }

    #[test]
    fn ragged_row_reports_line() {
        match parse_matrix("1 2\n3 4\n5\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn bad_token_reports_position() {
        match parse_matrix("1 2\n3 x4\n") {
            Err(Error::Parse { line, field, .. }) => assert_eq!((line, field), (2, 2)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn empty_is_error() {
        assert!(matches!(parse_matrix(""), Err(Error::Empty(_))));
        assert!(matches!(parse_matrix("\n  \n"), Err(Error::Empty(_))));
    }

    #[test]
    fn writes_plain_integers() {
        assert_eq!(format_matrix(&DMatrix::zeros(1, 1)), "0\n");
        assert_eq!(format_matrix(&DMatrix::identity(2, 2)), "1\t0\n0\t1\n");
    }

    #[test]
    fn file_round_trip_and_shape_check() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.txt");
        let m = DMatrix::from_row_slice(3, 2, &[1.0, -2.5e-9, 3.25, 1e300, 0.1, -7.0]);
        write_matrix(&m, &path).unwrap();
        let ts = read_matrix(&path).unwrap();
        assert_eq!(ts.data(), &m);
        write_matrix(&DMatrix::zeros(1, 1), &path).unwrap();
        assert!(read_matrix(&path).is_err());
        assert_eq!(read_dmatrix(&path).unwrap(), DMatrix::zeros(1, 1));
    }

    #[test]
    fn unwritable_path_is_io_error() {
        let err = write_matrix(&DMatrix::zeros(1, 1), "/nonexistent-dir/x.txt").unwrap_err();
        assert_eq!(err.exit_code(), 4);
    }

    #[test]
    fn csv_layout() {
        let csv = matrix_csv(&DMatrix::from_row_slice(1, 2, &[0.5, 1.0]));
        assert_eq!(csv, "row,col,value\n1,1,0.5\n1,2,1\n");
        let vals = parse_csv_values(&csv).unwrap();
        assert_eq!(vals, vec![("1,1".to_string(), 0.5), ("1,2".to_string(), 1.0)]);
    }

    proptest! {
        #[test]
        fn text_round_trip(rows in 1usize..6, cols in 1usize..5,
                           vals in proptest::collection::vec(-1e12f64..1e12, 30),
                           scale in -300i32..300) {
            let m = DMatrix::from_fn(rows, cols, |i, j| vals[i * cols + j] * 10f64.powi(scale).min(1e290));
            let back = parse_matrix(&format_matrix(&m)).unwrap();
            for (a, b) in m.iter().zip(back.iter()) {
                prop_assert!((a - b).abs() <= 1e-14 * a.abs());
            }
        }
    }
}
