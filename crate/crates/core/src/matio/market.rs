//! NIST Matrix Market exchange format, `real general` only.
//!
//! `coordinate` files decode to [`SparseMatrixCSC`] (duplicate entries are
//! summed), `array` files to [`DenseMatrix`]. Indices are 1-based on disk.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use super::{DenseMatrix, Matrix, SparseMatrixCSC};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MatrixMarketFormat {
    Coordinate,
    Array,
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn parse_header(line_no: usize, line: &str) -> Result<MatrixMarketFormat> {
    let tokens: Vec<String> = line
        .split_whitespace()
        .map(str::to_ascii_lowercase)
        .collect();
    if tokens.first().map(String::as_str) != Some("%%matrixmarket") {
        return Err(parse_err(line_no, "header must start with %%MatrixMarket"));
    }
    if tokens.len() != 5 {
        return Err(parse_err(
            line_no,
            "header must have the form %%MatrixMarket matrix <format> real general",
        ));
    }
    if tokens[1] != "matrix" {
        return Err(parse_err(
            line_no,
            format!("unsupported object '{}'", tokens[1]),
        ));
    }
    let format = match tokens[2].as_str() {
        "coordinate" => MatrixMarketFormat::Coordinate,
        "array" => MatrixMarketFormat::Array,
        other => return Err(parse_err(line_no, format!("unknown format '{other}'"))),
    };
    if tokens[3] != "real" {
        return Err(parse_err(
            line_no,
            format!("unsupported field '{}', only real", tokens[3]),
        ));
    }
    if tokens[4] != "general" {
        return Err(parse_err(
            line_no,
            format!("unsupported symmetry '{}', only general", tokens[4]),
        ));
    }
    Ok(format)
}

fn parse_usize(line_no: usize, tok: Option<&str>, what: &str) -> Result<usize> {
    let tok = tok.ok_or_else(|| parse_err(line_no, format!("missing {what}")))?;
    tok.parse()
        .map_err(|_| parse_err(line_no, format!("invalid {what} '{tok}'")))
}

fn parse_f64(line_no: usize, tok: Option<&str>) -> Result<f64> {
    let tok = tok.ok_or_else(|| parse_err(line_no, "missing value"))?;
    let v: f64 = tok
        .parse()
        .map_err(|_| parse_err(line_no, format!("invalid value '{tok}'")))?;
    if !v.is_finite() {
        return Err(parse_err(line_no, format!("non-finite value '{tok}'")));
    }
    Ok(v)
}

/// Reads a Matrix Market file.
pub fn read_matrix_market(path: impl AsRef<Path>) -> Result<Matrix> {
    let file = File::open(path)?;
    parse_matrix_market(BufReader::new(file))
}

/// Parses Matrix Market text from any buffered reader.
pub fn parse_matrix_market<R: BufRead>(reader: R) -> Result<Matrix> {
    let mut lines = reader.lines().enumerate().map(|(i, l)| (i + 1, l));

    let (line_no, header) = match lines.next() {
        Some((n, l)) => (n, l?),
        None => return Err(parse_err(1, "empty file")),
    };
    let format = parse_header(line_no, &header)?;

    // Content lines: skip comments and blanks.
    let mut content = lines.filter_map(|(n, l)| match l {
        Ok(l) => {
            let t = l.trim();
            if t.is_empty() || t.starts_with('%') {
                None
            } else {
                Some(Ok((n, t.to_string())))
            }
        }
        Err(e) => Some(Err(Error::from(e))),
    });

    let (size_no, size_line) = content
        .next()
        .transpose()?
        .ok_or_else(|| parse_err(line_no + 1, "missing size line"))?;
    let mut toks = size_line.split_whitespace();
    let rows = parse_usize(size_no, toks.next(), "row count")?;
    let cols = parse_usize(size_no, toks.next(), "column count")?;

    match format {
        MatrixMarketFormat::Coordinate => {
            let nnz = parse_usize(size_no, toks.next(), "entry count")?;
            if toks.next().is_some() {
                return Err(parse_err(size_no, "trailing tokens on size line"));
            }
            let mut triplets = Vec::with_capacity(nnz);
            let mut last = size_no;
            for item in content {
                let (n, l) = item?;
                last = n;
                if triplets.len() == nnz {
                    return Err(parse_err(
                        n,
                        format!("more than the declared {nnz} entries"),
                    ));
                }
                let mut t = l.split_whitespace();
                let i = parse_usize(n, t.next(), "row index")?;
                let j = parse_usize(n, t.next(), "column index")?;
                let v = parse_f64(n, t.next())?;
                if t.next().is_some() {
                    return Err(parse_err(n, "trailing tokens"));
                }
                if i == 0 || i > rows || j == 0 || j > cols {
                    return Err(parse_err(
                        n,
                        format!("index ({i}, {j}) outside a {rows}x{cols} matrix"),
                    ));
                }
                triplets.push((i - 1, j - 1, v));
            }
            if triplets.len() != nnz {
                return Err(parse_err(
                    last,
                    format!("expected {nnz} entries, found {}", triplets.len()),
                ));
            }
            Ok(Matrix::Sparse(SparseMatrixCSC::from_triplets(
                rows, cols, triplets,
            )?))
        }
        MatrixMarketFormat::Array => {
            if toks.next().is_some() {
                return Err(parse_err(size_no, "array size line takes two integers"));
            }
            let expected = rows
                .checked_mul(cols)
                .ok_or_else(|| parse_err(size_no, "matrix too large"))?;
            let mut data = Vec::with_capacity(expected);
            let mut last = size_no;
            for item in content {
                let (n, l) = item?;
                last = n;
                for tok in l.split_whitespace() {
                    if data.len() == expected {
                        return Err(parse_err(
                            n,
                            format!("more than the declared {expected} values"),
                        ));
                    }
                    data.push(parse_f64(n, Some(tok))?);
                }
            }
            if data.len() != expected {
                return Err(parse_err(
                    last,
                    format!("expected {expected} values, found {}", data.len()),
                ));
            }
            Ok(Matrix::Dense(DenseMatrix::from_col_major(
                rows, cols, data,
            )?))
        }
    }
}

/// Shortest decimal text that parses back to exactly `v`.
pub(crate) fn format_f64(v: f64) -> String {
    let a = v.abs();
    if v != 0.0 && !(1e-5..1e16).contains(&a) {
        format!("{v:e}")
    } else {
        format!("{v}")
    }
}

/// Writes Matrix Market text. Dense input is written in `array` format,
/// sparse input in `coordinate` format.
pub fn write_matrix_market_to<W: Write>(m: &Matrix, out: &mut W) -> Result<()> {
    match m {
        Matrix::Dense(d) => {
            writeln!(out, "%%MatrixMarket matrix array real general")?;
            writeln!(out, "{} {}", d.rows(), d.cols())?;
            for v in d.data() {
                writeln!(out, "{}", format_f64(*v))?;
            }
        }
        Matrix::Sparse(s) => {
            writeln!(out, "%%MatrixMarket matrix coordinate real general")?;
            writeln!(out, "{} {} {}", s.rows(), s.cols(), s.nnz())?;
            for (i, j, v) in s.triplets() {
                writeln!(out, "{} {} {}", i + 1, j + 1, format_f64(v))?;
            }
        }
    }
    Ok(())
}

/// Writes `m` to `path`, replacing any existing file.
pub fn write_matrix_market(m: &Matrix, path: impl AsRef<Path>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_matrix_market_to(m, &mut w)?;
    w.flush()?;
    Ok(())
}
