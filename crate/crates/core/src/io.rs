//! Columnar text format for fields: a header `# L=<L> N=<N>` followed by one
//! `x value` pair per line, both printed with 17 significant digits.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::grid::{Field, Grid};

pub fn field_to_string(f: &Field) -> String {
    let grid = f.grid();
    let mut out = String::with_capacity(48 * grid.len() + 32);
    let _ = writeln!(out, "# L={:.16e} N={}", grid.length(), grid.len());
    for (x, v) in grid.nodes().iter().zip(f.values()) {
        let _ = writeln!(out, "{x:.16e} {v:.16e}");
    }
    out
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

fn parse_header(line: &str) -> Result<(f64, usize)> {
    let body = line.strip_prefix('#').ok_or_else(|| parse_err(1, "expected header `# L=<L> N=<N>`"))?;
    let mut length = None;
    let mut n = None;
    for tok in body.split_whitespace() {
        if let Some(v) = tok.strip_prefix("L=") {
            length = Some(v.parse::<f64>().map_err(|e| parse_err(1, format!("L: {e}")))?);
        } else if let Some(v) = tok.strip_prefix("N=") {
            n = Some(v.parse::<usize>().map_err(|e| parse_err(1, format!("N: {e}")))?);
        }
    }
    match (length, n) {
        (Some(l), Some(n)) => Ok((l, n)),
        _ => Err(parse_err(1, "header must define both L and N")),
    }
}

/// Parses a field; the node column must match the grid named in the header.
pub fn field_from_str(text: &str) -> Result<Field> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines.next().ok_or_else(|| parse_err(1, "empty input"))?;
    let (length, n) = parse_header(header.trim())?;
    let grid = Grid::new(length, n)?;
    let mut values = Vec::with_capacity(n);
    for (idx, line) in lines {
        let lineno = idx + 1;
        if line.trim_start().starts_with('#') {
            continue;
        }
        let mut cols = line.split_whitespace();
        let (Some(xs), Some(vs), None) = (cols.next(), cols.next(), cols.next()) else {
            return Err(parse_err(lineno, "expected two columns `x value`"));
        };
        let x: f64 = xs.parse().map_err(|e| parse_err(lineno, format!("x: {e}")))?;
        let v: f64 = vs.parse().map_err(|e| parse_err(lineno, format!("value: {e}")))?;
        let i = values.len();
        if i >= n {
            return Err(parse_err(lineno, format!("more than N={n} samples")));
        }
        let expected = grid.nodes()[i];
        if (x - expected).abs() > 1e-9 * (1.0 + expected.abs()) {
            return Err(parse_err(lineno, format!("node {x} does not match grid node {expected}")));
        }
        if !v.is_finite() {
            return Err(parse_err(lineno, "non-finite value"));
        }
        values.push(v);
    }
    if values.len() != n {
        return Err(Error::LengthMismatch { expected: n, got: values.len() });
    }
    Field::new(&grid, values)
}

pub fn write_field(path: &std::path::Path, f: &Field) -> std::io::Result<()> {
    std::fs::write(path, field_to_string(f))
}

/// Reads a field file; I/O failures surface as a parse error at line 0.
pub fn read_field(path: &std::path::Path) -> Result<Field> {
    let text = std::fs::read_to_string(path).map_err(|e| parse_err(0, format!("{}: {e}", path.display())))?;
    field_from_str(&text)
}
