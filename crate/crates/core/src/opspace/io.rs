//! Operator file formats.
//!
//! Text: one matrix row per line, entries separated by whitespace, each entry
//! written as `re+imj` (or `re-imj`). A bare real number or a bare `imj` is
//! also accepted. Blank lines and anything after `#` are ignored.
//!
//! ```text
//! # Pauli Y
//! 0+0j 0-1j
//! 0+1j 0+0j
//! ```
//!
//! Binary: the 4-byte magic `OQOP`, a format version byte (currently 1), the
//! dimension as a little-endian `u32`, then `dim * dim` entries in row-major
//! order, each as two little-endian `f64` (real, imaginary).

use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex64;

use super::operator::Operator;
use crate::error::{Error, Result};

pub const BINARY_MAGIC: &[u8; 4] = b"OQOP";
pub const BINARY_VERSION: u8 = 1;
const HEADER_LEN: usize = 9;

pub fn format_complex(z: Complex64) -> String {
    let sign = if z.im.is_sign_negative() { '-' } else { '+' };
    format!("{:e}{}{:e}j", z.re, sign, z.im.abs())
}

pub fn parse_complex(s: &str) -> Result<Complex64> {
    let bad = || Error::Parse(format!("invalid complex entry '{s}'"));
    let num = |t: &str| t.parse::<f64>().map_err(|_| bad());
    let body = match s.strip_suffix('j').or_else(|| s.strip_suffix('i')) {
        Some(b) => b,
        None => return Ok(Complex64::new(num(s)?, 0.0)),
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    match split {
        Some(k) => {
            let im = match &body[k..] {
                "+" => 1.0,
                "-" => -1.0,
                t => num(t)?,
            };
            Ok(Complex64::new(num(&body[..k])?, im))
        }
        None => {
            let im = match body {
                "" | "+" => 1.0,
                "-" => -1.0,
                t => num(t)?,
            };
            Ok(Complex64::new(0.0, im))
        }
    }
}

pub fn to_text(op: &Operator) -> String {
    let d = op.dim();
    let mut out = String::new();
    for i in 0..d {
        for j in 0..d {
            if j > 0 {
                out.push(' ');
            }
            let _ = write!(out, "{}", format_complex(op.get(i, j)));
        }
        out.push('\n');
    }
    out
}

pub fn parse_text(text: &str) -> Result<Operator> {
    let mut rows: Vec<Vec<Complex64>> = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let row = line
            .split_whitespace()
            .map(parse_complex)
            .collect::<Result<Vec<_>>>()
            .map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)))?;
        rows.push(row);
    }
    let d = rows.len();
    if d == 0 {
        return Err(Error::Parse("no matrix rows".into()));
    }
    if let Some(r) = rows.iter().position(|r| r.len() != d) {
        return Err(Error::Parse(format!(
            "row {} has {} entries, expected {d}",
            r + 1,
            rows[r].len()
        )));
    }
    let flat: Vec<Complex64> = rows.into_iter().flatten().collect();
    Operator::from_rows(d, &flat)
}

pub fn to_binary(op: &Operator) -> Vec<u8> {
    let d = op.dim();
    let mut out = Vec::with_capacity(HEADER_LEN + 16 * d * d);
    out.extend_from_slice(BINARY_MAGIC);
    out.push(BINARY_VERSION);
    out.extend_from_slice(&(d as u32).to_le_bytes());
    for i in 0..d {
        for j in 0..d {
            let z = op.get(i, j);
            out.extend_from_slice(&z.re.to_le_bytes());
            out.extend_from_slice(&z.im.to_le_bytes());
        }
    }
    out
}

pub fn from_binary(bytes: &[u8]) -> Result<Operator> {
    if bytes.len() < HEADER_LEN || &bytes[..4] != BINARY_MAGIC {
        return Err(Error::Parse("missing OQOP header".into()));
    }
    if bytes[4] != BINARY_VERSION {
        return Err(Error::Parse(format!("unsupported binary version {}", bytes[4])));
    }
    let d = u32::from_le_bytes(bytes[5..9].try_into().unwrap()) as usize;
    let want = HEADER_LEN + 16 * d * d;
    if bytes.len() != want {
        return Err(Error::Parse(format!(
            "binary payload has {} bytes, expected {want}",
            bytes.len()
        )));
    }
    let f = |k: usize| f64::from_le_bytes(bytes[k..k + 8].try_into().unwrap());
    let entries: Vec<Complex64> = (0..d * d)
        .map(|k| {
            let off = HEADER_LEN + 16 * k;
            Complex64::new(f(off), f(off + 8))
        })
        .collect();
    Operator::from_rows(d, &entries)
}

/// Reads either format, detected by the binary magic.
pub fn read_operator(path: impl AsRef<Path>) -> Result<Operator> {
    let bytes = std::fs::read(path.as_ref())?;
    if bytes.starts_with(BINARY_MAGIC) {
        from_binary(&bytes)
    } else {
        let text = String::from_utf8(bytes).map_err(|_| Error::Parse("operator file is not UTF-8 text".into()))?;
        parse_text(&text)
    }
}

pub fn write_text(path: impl AsRef<Path>, op: &Operator) -> Result<()> {
    std::fs::write(path, to_text(op))?;
    Ok(())
}

pub fn write_binary(path: impl AsRef<Path>, op: &Operator) -> Result<()> {
    std::fs::write(path, to_binary(op))?;
    Ok(())
}
