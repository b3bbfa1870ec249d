//! Plain-text file helpers shared by the graph loader and the pipeline stages.
//!
//! Reals are written with Rust's shortest round-trip formatting, so every value
//! read back is bit-identical to the value written.

use std::fs;
use std::path::Path;

use crate::dense::DenseMatrix;
use crate::error::{Result, RslError};

pub fn read_to_string(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| {
        if e.kind() == std::io::ErrorKind::NotFound {
            RslError::Dependency(path.to_path_buf())
        } else {
            RslError::io(path, e)
        }
    })
}

pub fn write_string(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent).map_err(|e| RslError::io(parent, e))?;
        }
    }
    fs::write(path, contents).map_err(|e| RslError::io(path, e))
}

pub(crate) fn parse_err(path: &Path, line: usize, msg: impl Into<String>) -> RslError {
    RslError::Parse {
        path: path.to_path_buf(),
        line,
        msg: msg.into(),
    }
}

pub(crate) fn parse_f64(path: &Path, line: usize, tok: &str) -> Result<f64> {
    tok.trim()
        .parse::<f64>()
        .map_err(|_| parse_err(path, line, format!("`{}` is not a real number", tok.trim())))
}

/// Headerless comma-separated matrix; blank lines are skipped.
pub fn read_matrix_csv(path: &Path) -> Result<DenseMatrix> {
    let text = read_to_string(path)?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let row = line
            .split(',')
            .map(|tok| parse_f64(path, i + 1, tok))
            .collect::<Result<Vec<f64>>>()?;
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(parse_err(
                    path,
                    i + 1,
                    format!("expected {} columns, found {}", first.len(), row.len()),
                ));
            }
        }
        rows.push(row);
    }
    DenseMatrix::from_rows(&rows)
}

pub fn format_matrix_csv(m: &DenseMatrix) -> String {
    let mut s = String::new();
    for r in 0..m.rows() {
        let line: Vec<String> = m.row(r).iter().map(|v| v.to_string()).collect();
        s.push_str(&line.join(","));
        s.push('\n');
    }
    s
}

pub fn write_matrix_csv(path: &Path, m: &DenseMatrix) -> Result<()> {
    write_string(path, &format_matrix_csv(m))
}

/// One trimmed label per non-empty line.
pub fn read_labels(path: &Path) -> Result<Vec<String>> {
    Ok(read_to_string(path)?
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(String::from)
        .collect())
}

/// Simple comma-separated table with a header row, returned as
/// `(header, rows)` with line numbers kept for error messages.
pub fn read_table(path: &Path) -> Result<(Vec<String>, Vec<(usize, Vec<String>)>)> {
    let text = read_to_string(path)?;
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let header: Vec<String> = match lines.next() {
        Some((_, l)) => l.split(',').map(|s| s.trim().to_string()).collect(),
        None => return Err(parse_err(path, 1, "missing header row")),
    };
    let mut rows = Vec::new();
    for (i, line) in lines {
        let cells: Vec<String> = line.split(',').map(|s| s.trim().to_string()).collect();
        if cells.len() != header.len() {
            return Err(parse_err(
                path,
                i + 1,
                format!("expected {} cells, found {}", header.len(), cells.len()),
            ));
        }
        rows.push((i + 1, cells));
    }
    Ok((header, rows))
}

pub(crate) fn column(path: &Path, header: &[String], name: &str) -> Result<usize> {
    header
        .iter()
        .position(|h| h == name)
        .ok_or_else(|| parse_err(path, 1, format!("missing column `{name}`")))
}
