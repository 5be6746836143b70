//! Plain-text impedance matrix files.
//!
//! ```text
//! # zmatrix v1 n_active=6 n_parasitic=2 z0=50
//! 73.07+41.76j -12.52-29.9j ...
//! ...
//! ```
//!
//! One line per row of the full `(N_A + N_A·N_P)²` matrix in canonical element
//! order; entries are `re±imj` separated by single spaces. Values are written
//! with the shortest representation that parses back to the same `f64`.

use std::fs;
use std::io::Write;
use std::path::Path;

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::array::PartitionedImpedance;
use crate::error::{Error, Result};

const MAGIC: &str = "# zmatrix v1";
/// Relative tolerance on `|Z − Zᵀ|` accepted on import.
pub const SYMMETRY_TOLERANCE: f64 = 1e-6;

/// Contents of an impedance file.
#[derive(Debug, Clone, PartialEq)]
pub struct ZMatrixFile {
    pub impedance: PartitionedImpedance,
    /// Reference impedance the matrix was derived with, ohms.
    pub z0: f64,
}

fn format_entry(z: Complex64) -> String {
    let sign = if z.im.is_sign_negative() { '-' } else { '+' };
    format!("{:?}{}{:?}j", z.re, sign, z.im.abs())
}

fn parse_entry(token: &str) -> Option<Complex64> {
    let body = token.strip_suffix('j')?;
    // the re/im split is the last sign that is not a leading sign or an exponent sign
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&i| (bytes[i] == b'+' || bytes[i] == b'-') && !matches!(bytes[i - 1], b'e' | b'E'))?;
    let re: f64 = body[..split].parse().ok()?;
    let im: f64 = body[split..].trim_start_matches('+').parse().ok()?;
    (re.is_finite() && im.is_finite()).then(|| Complex64::new(re, im))
}

/// Serializes the full matrix with its header.
pub fn format_zmatrix(z: &PartitionedImpedance, z0: f64) -> String {
    let full = z.full();
    let mut out = format!(
        "{MAGIC} n_active={} n_parasitic={} z0={:?}\n",
        z.n_active, z.n_parasitic_per_active, z0
    );
    for row in full.row_iter() {
        let line: Vec<String> = row.iter().map(|&v| format_entry(v)).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}

fn header_field<'a>(header: &'a str, key: &str) -> Result<&'a str> {
    header
        .split_whitespace()
        .find_map(|tok| tok.strip_prefix(key).and_then(|rest| rest.strip_prefix('=')))
        .ok_or_else(|| Error::Format(format!("line 1: header is missing `{key}=`")))
}

/// Parses a file body, validating dimensions, reciprocity and passivity.
pub fn parse_zmatrix(text: &str) -> Result<ZMatrixFile> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::Format("empty impedance file".into()))?;
    if !header.starts_with(MAGIC) {
        return Err(Error::Format(format!("line 1: expected header starting with `{MAGIC}`")));
    }
    let parse_count = |key: &str| -> Result<usize> {
        header_field(header, key)?
            .parse()
            .map_err(|_| Error::Format(format!("line 1: `{key}` is not a non-negative integer")))
    };
    let n_active = parse_count("n_active")?;
    let n_parasitic = parse_count("n_parasitic")?;
    let z0: f64 = header_field(header, "z0")?
        .parse()
        .map_err(|_| Error::Format("line 1: `z0` is not a number".into()))?;
    if n_active == 0 {
        return Err(Error::Format("line 1: n_active must be at least 1".into()));
    }

    let mut rows: Vec<Vec<Complex64>> = Vec::new();
    for (idx, line) in lines {
        let row = line
            .split(' ')
            .filter(|t| !t.is_empty())
            .map(|t| {
                parse_entry(t).ok_or_else(|| Error::Format(format!("line {}: bad entry `{t}`", idx + 1)))
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    let n = n_active * (1 + n_parasitic);
    if rows.len() != n {
        return Err(Error::Dimension(format!(
            "file has {} rows but n_active={n_active}, n_parasitic={n_parasitic} needs {n}",
            rows.len()
        )));
    }
    if let Some((r, row)) = rows.iter().enumerate().find(|(_, row)| row.len() != n) {
        return Err(Error::Dimension(format!(
            "row {r} has {} entries, expected {n}",
            row.len()
        )));
    }
    let full = DMatrix::from_fn(n, n, |i, j| rows[i][j]);
    let impedance = PartitionedImpedance::from_full(&full, n_active, n_parasitic)?;
    impedance.validate(SYMMETRY_TOLERANCE)?;
    Ok(ZMatrixFile { impedance, z0 })
}

pub fn export_impedance(z: &PartitionedImpedance, z0: f64, path: impl AsRef<Path>) -> Result<()> {
    let mut file = fs::File::create(path)?;
    file.write_all(format_zmatrix(z, z0).as_bytes())?;
    Ok(())
}

pub fn import_impedance(path: impl AsRef<Path>) -> Result<ZMatrixFile> {
    parse_zmatrix(&fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn entry_round_trip() {
        for z in [
            Complex64::new(73.07, 41.76),
            Complex64::new(-12.5, -29.9),
            Complex64::new(1e-300, -2.5e17),
            Complex64::new(0.0, -0.0),
        ] {
            let parsed = parse_entry(&format_entry(z)).unwrap();
            assert_eq!(parsed.re.to_bits(), z.re.to_bits());
            assert_eq!(parsed.im.to_bits(), z.im.to_bits());
        }
    }

    #[test]
    fn accepts_exponent_notation() {
        assert_eq!(parse_entry("1e-3+2E+2j"), Some(Complex64::new(1e-3, 200.0)));
        assert_eq!(parse_entry("-4.5e1-1e-1j"), Some(Complex64::new(-45.0, -0.1)));
        assert_eq!(parse_entry("12"), None);
        assert_eq!(parse_entry("abc+1j"), None);
    }

    #[test]
    fn rejects_bad_header() {
        assert!(matches!(parse_zmatrix("1+0j\n"), Err(Error::Format(_))));
        assert!(matches!(
            parse_zmatrix("# zmatrix v1 n_active=1 z0=50\n1+0j\n"),
            Err(Error::Format(_))
        ));
    }

    #[test]
    fn rejects_asymmetric_matrix() {
        let text = "# zmatrix v1 n_active=2 n_parasitic=0 z0=50\n73+0j 10+0j\n11+0j 73+0j\n";
        assert!(matches!(parse_zmatrix(text), Err(Error::Format(_))));
    }

    #[test]
    fn rejects_ragged_rows() {
        let text = "# zmatrix v1 n_active=2 n_parasitic=0 z0=50\n73+0j 10+0j\n10+0j\n";
        assert!(matches!(parse_zmatrix(text), Err(Error::Dimension(_))));
    }
}
