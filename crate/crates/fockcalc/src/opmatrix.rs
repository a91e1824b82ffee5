//! The `opmatrix-v1` text format.
//!
//! ```text
//! opmatrix v1
//! dim 2
//! # function ln
//! 1.0000000000000000e0,0.0000000000000000e0 0.0000000000000000e0,0.0000000000000000e0
//! 0.0000000000000000e0,0.0000000000000000e0 1.0000000000000000e0,0.0000000000000000e0
//! ```
//!
//! Entries are `re,im` pairs with 17 significant digits, so every `f64`
//! survives a write and re-read bit for bit. `#` lines after the header carry
//! `key value` metadata.

use std::fmt::Write as _;
use std::io;
use std::path::Path;

use fockcalc_core::fock::FockOperator;
use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use thiserror::Error;

pub const MAGIC: &str = "opmatrix v1";

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("line 1: expected `{MAGIC}`")]
    BadMagic,
    #[error("line 2: expected `dim <D>`")]
    BadDim,
    #[error("line {line}: expected {expected} entries, found {found}")]
    RowLength { line: usize, expected: usize, found: usize },
    #[error("line {line}, entry {col}: cannot parse `{text}` as `re,im`")]
    BadEntry { line: usize, col: usize, text: String },
    #[error("expected {expected} data rows, found {found}")]
    RowCount { expected: usize, found: usize },
    #[error(transparent)]
    Operator(#[from] fockcalc_core::Error),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// A parsed file: the operator and its metadata in file order.
#[derive(Clone, Debug, PartialEq)]
pub struct OpMatrixFile {
    pub meta: Vec<(String, String)>,
    pub op: FockOperator,
}

impl OpMatrixFile {
    pub fn meta_value(&self, key: &str) -> Option<&str> {
        self.meta.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }
}

/// Scientific form with 17 significant digits.
pub fn format_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn to_string(op: &FockOperator, meta: &[(String, String)]) -> String {
    let d = op.dim();
    let mut out = String::with_capacity(d * d * 48 + 64);
    let _ = writeln!(out, "{MAGIC}");
    let _ = writeln!(out, "dim {d}");
    for (k, v) in meta {
        let _ = writeln!(out, "# {k} {v}");
    }
    for n in 0..d {
        for m in 0..d {
            let z = op.get(n, m);
            if m > 0 {
                out.push(' ');
            }
            out.push_str(&format_f64(z.re));
            out.push(',');
            out.push_str(&format_f64(z.im));
        }
        out.push('\n');
    }
    out
}

pub fn write(path: &Path, op: &FockOperator, meta: &[(String, String)]) -> io::Result<()> {
    std::fs::write(path, to_string(op, meta))
}

fn parse_entry(text: &str, line: usize, col: usize) -> Result<C64, FormatError> {
    let bad = || FormatError::BadEntry { line, col, text: text.to_string() };
    let (re, im) = text.split_once(',').ok_or_else(bad)?;
    let re: f64 = re.parse().map_err(|_| bad())?;
    let im: f64 = im.parse().map_err(|_| bad())?;
    Ok(C64::new(re, im))
}

pub fn parse(text: &str) -> Result<OpMatrixFile, FormatError> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim_end_matches('\r')));
    match lines.next() {
        Some((_, l)) if l.trim() == MAGIC => {}
        _ => return Err(FormatError::BadMagic),
    }
    let dim: usize = match lines.next() {
        Some((_, l)) => l
            .trim()
            .strip_prefix("dim")
            .and_then(|rest| rest.trim().parse().ok())
            .ok_or(FormatError::BadDim)?,
        None => return Err(FormatError::BadDim),
    };
    let mut meta = Vec::new();
    let mut mat = DMatrix::zeros(dim, dim);
    let mut row = 0;
    for (line, l) in lines {
        let l = l.trim();
        if let Some(comment) = l.strip_prefix('#') {
            let comment = comment.trim();
            let (k, v) = comment.split_once(char::is_whitespace).unwrap_or((comment, ""));
            meta.push((k.to_string(), v.trim().to_string()));
            continue;
        }
        if l.is_empty() {
            continue;
        }
        if row >= dim {
            return Err(FormatError::RowCount { expected: dim, found: row + 1 });
        }
        let fields: Vec<&str> = l.split_whitespace().collect();
        if fields.len() != dim {
            return Err(FormatError::RowLength { line, expected: dim, found: fields.len() });
        }
        for (m, f) in fields.iter().enumerate() {
            mat[(row, m)] = parse_entry(f, line, m)?;
        }
        row += 1;
    }
    if row != dim {
        return Err(FormatError::RowCount { expected: dim, found: row });
    }
    Ok(OpMatrixFile { meta, op: FockOperator::from_matrix(mat)? })
}

pub fn read(path: &Path) -> Result<OpMatrixFile, FormatError> {
    parse(&std::fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use fockcalc_core::fock::{ladder_a, translation_op, Truncation};

    fn cfg(d: usize) -> Truncation {
        Truncation::new(d).unwrap()
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let op = translation_op(C64::new(0.3, -1.7), cfg(9)).unwrap();
        let meta = vec![("function".to_string(), "exp".to_string()), ("valid_rows".to_string(), "9".to_string())];
        let text = to_string(&op, &meta);
        let back = parse(&text).unwrap();
        assert_eq!(back.meta, meta);
        assert_eq!(back.meta_value("valid_rows"), Some("9"));
        for n in 0..9 {
            for m in 0..9 {
                assert_eq!(back.op.get(n, m).re.to_bits(), op.get(n, m).re.to_bits());
                assert_eq!(back.op.get(n, m).im.to_bits(), op.get(n, m).im.to_bits());
            }
        }
        assert_eq!(to_string(&back.op, &back.meta), text);
    }

    #[test]
    fn layout() {
        let text = to_string(&ladder_a(cfg(2)), &[]);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "opmatrix v1");
        assert_eq!(lines[1], "dim 2");
        assert_eq!(lines[2], "0.0000000000000000e0,0.0000000000000000e0 1.0000000000000000e0,0.0000000000000000e0");
        assert_eq!(lines.len(), 4);
    }

    #[test]
    fn signed_zero_and_extremes_survive() {
        for x in [-0.0, f64::MIN_POSITIVE, 5e-324, f64::MAX, -1.0 / 3.0, 0.1] {
            assert_eq!(format_f64(x).parse::<f64>().unwrap().to_bits(), x.to_bits());
        }
    }

    #[test]
    fn malformed_inputs() {
        assert!(matches!(parse("opmatrix v2\ndim 2\n"), Err(FormatError::BadMagic)));
        assert!(matches!(parse("opmatrix v1\ndims 2\n"), Err(FormatError::BadDim)));
        assert!(matches!(parse("opmatrix v1\ndim 2\n1,0 0,0\n"), Err(FormatError::RowCount { expected: 2, found: 1 })));
        assert!(matches!(
            parse("opmatrix v1\ndim 2\n1,0\n0,0 1,0\n"),
            Err(FormatError::RowLength { line: 3, expected: 2, found: 1 })
        ));
        assert!(matches!(parse("opmatrix v1\ndim 2\n1,0 x,0\n0,0 1,0\n"), Err(FormatError::BadEntry { col: 1, .. })));
        assert!(matches!(parse("opmatrix v1\ndim 2\n1,0 inf,0\n0,0 1,0\n"), Err(FormatError::Operator(_))));
        let ok = parse("opmatrix v1\ndim 2\n# note\n1,0 0,0\n\n0,0 1,0\n").unwrap();
        assert_eq!(ok.meta, vec![("note".to_string(), String::new())]);
    }
}
