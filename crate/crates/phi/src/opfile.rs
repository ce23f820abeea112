//! Operator text format: line 1 is the dimension, the next `dim` lines hold
//! `dim` whitespace-separated decimals each, and `#`-prefixed lines are
//! comments. Blank lines are skipped.

use crate::mat::Mat;
use crate::operator::{HermitianOperator, OperatorError, DEFAULT_SYM_TOL};
use std::io::Write;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum OpFileError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("operator format error at line {line}, column {col}: {msg}")]
    Format {
        line: usize,
        col: usize,
        msg: String,
    },
    #[error(transparent)]
    Operator(#[from] OperatorError),
}

/// Parse the operator text format from a file; symmetry is validated at
/// the default tolerance.
pub fn parse_operator_file(path: &Path) -> Result<HermitianOperator, OpFileError> {
    let text = std::fs::read_to_string(path)?;
    parse_operator_str(&text)
}

/// Parse the operator text format from a string.
pub fn parse_operator_str(text: &str) -> Result<HermitianOperator, OpFileError> {
    let mut content_lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l))
        .filter(|(_, l)| {
            let t = l.trim_start();
            !t.is_empty() && !t.starts_with('#')
        });

    let (dim_lineno, dim_line) = content_lines.next().ok_or_else(|| OpFileError::Format {
        line: 1,
        col: 1,
        msg: "missing dimension line".to_string(),
    })?;
    let dim_tokens: Vec<(usize, &str)> = tokenize(dim_line);
    if dim_tokens.len() != 1 {
        return Err(OpFileError::Format {
            line: dim_lineno,
            col: dim_tokens.get(1).map(|t| t.0).unwrap_or(1),
            msg: "dimension line must hold a single integer".to_string(),
        });
    }
    let dim: usize = dim_tokens[0].1.parse().map_err(|_| OpFileError::Format {
        line: dim_lineno,
        col: dim_tokens[0].0,
        msg: format!("`{}` is not a valid dimension", dim_tokens[0].1),
    })?;
    if dim == 0 {
        return Err(OpFileError::Format {
            line: dim_lineno,
            col: dim_tokens[0].0,
            msg: "dimension must be at least 1".to_string(),
        });
    }

    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(dim);
    for _ in 0..dim {
        let (lineno, line) = content_lines.next().ok_or_else(|| OpFileError::Format {
            line: dim_lineno,
            col: 1,
            msg: format!("expected {dim} matrix rows, found {}", rows.len()),
        })?;
        let tokens = tokenize(line);
        if tokens.len() != dim {
            return Err(OpFileError::Format {
                line: lineno,
                col: tokens.last().map(|t| t.0).unwrap_or(1),
                msg: format!("expected {dim} entries, found {}", tokens.len()),
            });
        }
        let mut row = Vec::with_capacity(dim);
        for (col, tok) in tokens {
            let v: f64 = tok.parse().map_err(|_| OpFileError::Format {
                line: lineno,
                col,
                msg: format!("`{tok}` is not a valid number"),
            })?;
            row.push(v);
        }
        rows.push(row);
    }

    if let Some((lineno, _)) = content_lines.next() {
        return Err(OpFileError::Format {
            line: lineno,
            col: 1,
            msg: "unexpected content after the matrix rows".to_string(),
        });
    }

    Ok(HermitianOperator::new(
        Mat::from_rows(&rows),
        DEFAULT_SYM_TOL,
    )?)
}

/// Write an operator in the text format.
pub fn write_operator_file(op: &HermitianOperator, path: &Path) -> Result<(), OpFileError> {
    let mut out = std::fs::File::create(path)?;
    writeln!(out, "{}", op.dim())?;
    for i in 0..op.dim() {
        let row: Vec<String> = (0..op.dim())
            .map(|j| format!("{}", op.entry(i, j)))
            .collect();
        writeln!(out, "{}", row.join(" "))?;
    }
    Ok(())
}

/// Whitespace tokenizer keeping 1-based column positions.
fn tokenize(line: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start: Option<usize> = None;
    for (i, c) in line.char_indices() {
        if c.is_whitespace() {
            if let Some(s) = start.take() {
                out.push((s + 1, &line[s..i]));
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        out.push((s + 1, &line[s..]));
    }
    out
}
