//! The `polyseries v1` text format for truncated series.
//!
//! ```text
//! polyseries v1
//! kind ln
//! center 1.0000000000000000e0,0.0000000000000000e0
//! radius 5.0000000000000000e-1
//! degree 1
//! 0.0000000000000000e0,0.0000000000000000e0
//! 1.0000000000000000e0,0.0000000000000000e0
//! ```
//!
//! `kind` is one of `ln inv sqrt exp poly none`. `poly` is followed by a
//! `poly` line holding the monomial coefficients, `;` separated.

use std::fmt::Write as _;
use std::io;
use std::path::Path;

use fockcalc_core::approx::{DiskDomain, FunctionKind, PolySeries};
use num_complex::Complex64 as C64;
use thiserror::Error;

use crate::opmatrix::format_f64;

pub const MAGIC: &str = "polyseries v1";

#[derive(Debug, Error)]
pub enum SeriesError {
    #[error("line 1: expected `{MAGIC}`")]
    BadMagic,
    #[error("line {line}: expected `{key} ...`")]
    MissingKey { line: usize, key: &'static str },
    #[error("line {line}: cannot parse `{text}`")]
    BadValue { line: usize, text: String },
    #[error("expected {expected} coefficient lines, found {found}")]
    CoeffCount { expected: usize, found: usize },
    #[error(transparent)]
    Series(#[from] fockcalc_core::Error),
    #[error(transparent)]
    Io(#[from] io::Error),
}

fn complex(z: C64) -> String {
    format!("{},{}", format_f64(z.re), format_f64(z.im))
}

pub fn to_string(series: &PolySeries) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{MAGIC}");
    let _ = writeln!(out, "kind {}", series.kind().map_or("none", |k| k.name()));
    let _ = writeln!(out, "center {}", complex(series.center()));
    let _ = writeln!(out, "radius {}", format_f64(series.domain().radius()));
    if let Some(FunctionKind::Polynomial(p)) = series.kind() {
        let p: Vec<String> = p.iter().map(|z| complex(*z)).collect();
        let _ = writeln!(out, "poly {}", p.join(";"));
    }
    let _ = writeln!(out, "degree {}", series.degree());
    for c in series.coeffs() {
        let _ = writeln!(out, "{}", complex(*c));
    }
    out
}

pub fn write(path: &Path, series: &PolySeries) -> io::Result<()> {
    std::fs::write(path, to_string(series))
}

fn parse_complex(text: &str, line: usize) -> Result<C64, SeriesError> {
    let bad = || SeriesError::BadValue { line, text: text.to_string() };
    let (re, im) = text.split_once(',').ok_or_else(bad)?;
    Ok(C64::new(re.trim().parse().map_err(|_| bad())?, im.trim().parse().map_err(|_| bad())?))
}

pub fn parse(text: &str) -> Result<PolySeries, SeriesError> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())).filter(|(_, l)| !l.is_empty());
    match lines.next() {
        Some((_, MAGIC)) => {}
        _ => return Err(SeriesError::BadMagic),
    }
    let mut field = |key: &'static str| -> Result<(usize, String), SeriesError> {
        match lines.next() {
            Some((line, l)) => match l.strip_prefix(key).and_then(|v| v.strip_prefix(' ')) {
                Some(v) => Ok((line, v.trim().to_string())),
                None => Err(SeriesError::MissingKey { line, key }),
            },
            None => Err(SeriesError::MissingKey { line: 0, key }),
        }
    };
    let (kind_line, kind) = field("kind")?;
    let (line, center) = field("center")?;
    let center = parse_complex(&center, line)?;
    let (line, radius) = field("radius")?;
    let radius: f64 = radius.parse().map_err(|_| SeriesError::BadValue { line, text: radius.clone() })?;
    let kind = match kind.as_str() {
        "ln" => Some(FunctionKind::Log),
        "inv" => Some(FunctionKind::Reciprocal),
        "sqrt" => Some(FunctionKind::Sqrt),
        "exp" => Some(FunctionKind::Exp),
        "none" => None,
        "poly" => {
            let (line, p) = field("poly")?;
            let p: Result<Vec<C64>, _> = p.split(';').map(|t| parse_complex(t, line)).collect();
            Some(FunctionKind::Polynomial(p?))
        }
        _ => return Err(SeriesError::BadValue { line: kind_line, text: kind }),
    };
    let (line, degree) = field("degree")?;
    let degree: usize = degree.parse().map_err(|_| SeriesError::BadValue { line, text: degree.clone() })?;
    let coeffs: Result<Vec<C64>, _> = lines.map(|(line, l)| parse_complex(l, line)).collect();
    let coeffs = coeffs?;
    if coeffs.len() != degree + 1 {
        return Err(SeriesError::CoeffCount { expected: degree + 1, found: coeffs.len() });
    }
    let series = PolySeries::from_coeffs(DiskDomain::new(center, radius)?, coeffs)?;
    Ok(match kind {
        Some(k) => series.with_kind(k),
        None => series,
    })
}

pub fn read(path: &Path) -> Result<PolySeries, SeriesError> {
    parse(&std::fs::read_to_string(path)?)
}
