//! Plain-text file formats: matrices, label lists, and experiment reports.
//!
//! Matrix format: a header line `rows cols`, then `rows` lines of `cols`
//! whitespace-separated numbers. Lines starting with `#` are comments.
//! Values are written with 17 significant digits so doubles round-trip
//! exactly.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;

fn io_err(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.display().to_string(),
        source,
    }
}

pub fn save_matrix(path: &Path, m: &DenseMatrix) -> Result<()> {
    fs::write(path, format_matrix(m)).map_err(|e| io_err(path, e))
}

/// The on-disk text form of a matrix.
pub fn format_matrix(m: &DenseMatrix) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{} {}", m.nrows(), m.ncols());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            if j > 0 {
                out.push(' ');
            }
            let _ = write!(out, "{:.16e}", m[(i, j)]);
        }
        out.push('\n');
    }
    out
}

pub fn load_matrix(path: &Path) -> Result<DenseMatrix> {
    let contents = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    parse_matrix(&contents)
}

/// Parses the text form; errors carry the 1-based line number of the
/// offending line (comments and blank lines count).
pub fn parse_matrix(contents: &str) -> Result<DenseMatrix> {
    let mut data_lines = contents
        .lines()
        .enumerate()
        .map(|(idx, line)| (idx + 1, line.trim()))
        .filter(|(_, line)| !line.is_empty() && !line.starts_with('#'));

    let (header_line, header) = data_lines
        .next()
        .ok_or(Error::Parse { line: 1, message: "empty matrix file".into() })?;
    let mut parts = header.split_whitespace();
    let rows: usize = parts
        .next()
        .and_then(|t| t.parse().ok())
        .ok_or(Error::Parse { line: header_line, message: "bad row count in header".into() })?;
    let cols: usize = parts
        .next()
        .and_then(|t| t.parse().ok())
        .ok_or(Error::Parse { line: header_line, message: "bad column count in header".into() })?;
    if parts.next().is_some() {
        return Err(Error::Parse {
            line: header_line,
            message: "header must be exactly `rows cols`".into(),
        });
    }
    if rows == 0 || cols == 0 {
        return Err(Error::Parse {
            line: header_line,
            message: format!("matrix dimensions must be >= 1, got {rows} x {cols}"),
        });
    }

    let mut m = DenseMatrix::zeros(rows, cols);
    let mut filled = 0usize;
    for (line_no, line) in data_lines {
        if filled == rows {
            return Err(Error::Parse {
                line: line_no,
                message: format!("expected {rows} data rows, found extra data"),
            });
        }
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if tokens.len() != cols {
            return Err(Error::Parse {
                line: line_no,
                message: format!("expected {cols} values, found {}", tokens.len()),
            });
        }
        for (j, token) in tokens.iter().enumerate() {
            let value: f64 = token.parse().map_err(|_| Error::Parse {
                line: line_no,
                message: format!("non-numeric token `{token}`"),
            })?;
            if !value.is_finite() {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("non-finite value `{token}`"),
                });
            }
            m[(filled, j)] = value;
        }
        filled += 1;
    }
    if filled != rows {
        return Err(Error::Parse {
            line: contents.lines().count(),
            message: format!("expected {rows} data rows, found {filled}"),
        });
    }
    Ok(m)
}

/// One integer label per line, classes numbered from 1.
pub fn save_labels(path: &Path, labels: &[usize]) -> Result<()> {
    let mut out = String::new();
    for label in labels {
        let _ = writeln!(out, "{label}");
    }
    fs::write(path, out).map_err(|e| io_err(path, e))
}

pub fn load_labels(path: &Path) -> Result<Vec<usize>> {
    let contents = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let mut labels = Vec::new();
    for (idx, line) in contents.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let label: usize = line.parse().map_err(|_| Error::Parse {
            line: idx + 1,
            message: format!("bad label `{line}`"),
        })?;
        if label == 0 {
            return Err(Error::Parse {
                line: idx + 1,
                message: "labels are numbered from 1".into(),
            });
        }
        labels.push(label);
    }
    if labels.is_empty() {
        return Err(Error::Parse { line: 1, message: "empty label file".into() });
    }
    Ok(labels)
}

pub fn write_text(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| io_err(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand_chacha::{rand_core::SeedableRng, ChaCha8Rng};

    #[test]
    fn identity_round_trip_is_exact() {
        let m = DenseMatrix::identity(2, 2);
        let parsed = parse_matrix(&format_matrix(&m)).unwrap();
        assert_eq!(m, parsed);
    }

    #[test]
    fn random_round_trip_is_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(50);
        let m = DenseMatrix::from_fn(50, 80, |_, _| (rng.gen::<f64>() - 0.5) * 1e3);
        let parsed = parse_matrix(&format_matrix(&m)).unwrap();
        // 17 significant digits round-trip f64 exactly, well within 1e-15.
        assert_eq!(m, parsed);
    }

    #[test]
    fn ragged_row_reports_line_number() {
        let text = "2 3\n1 2 3\n4 5\n";
        match parse_matrix(text) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn non_numeric_token_reports_line_number() {
        let text = "1 2\n1.0 abc\n";
        match parse_matrix(text) {
            Err(Error::Parse { line, message }) => {
                assert_eq!(line, 2);
                assert!(message.contains("abc"));
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn comments_and_blank_lines_are_ignored() {
        let text = "# a matrix\n\n2 2\n# first row\n1 0\n0 1\n";
        assert_eq!(parse_matrix(text).unwrap(), DenseMatrix::identity(2, 2));
    }

    #[test]
    fn missing_rows_detected() {
        assert!(parse_matrix("3 2\n1 2\n3 4\n").is_err());
        assert!(parse_matrix("1 2\n1 2\n3 4\n").is_err());
    }

    #[test]
    fn labels_round_trip_and_validate() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("labels.txt");
        save_labels(&path, &[1, 2, 2, 3]).unwrap();
        assert_eq!(load_labels(&path).unwrap(), vec![1, 2, 2, 3]);

        std::fs::write(&path, "1\n0\n").unwrap();
        assert!(load_labels(&path).is_err());
        std::fs::write(&path, "1\nx\n").unwrap();
        assert!(load_labels(&path).is_err());
    }
}
