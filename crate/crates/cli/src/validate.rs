//! Post-write validator: re-reads every emitted CSV and re-checks the
//! row-wise inequalities its command promises.

use std::path::Path;

use crate::error::{CliError, CliResult};
use crate::output::{read_csv, Check};

fn column(path: &Path, header: &[String], name: &str) -> CliResult<usize> {
    header.iter().position(|h| h == name).ok_or_else(|| CliError::Validation {
        file: path.to_path_buf(),
        reason: format!("missing column '{name}'"),
    })
}

fn fail(path: &Path, check: &Check, row: usize, detail: String) -> CliError {
    CliError::Validation {
        file: path.to_path_buf(),
        reason: format!("{} fails at data row {}: {detail}", check.describe(), row + 1),
    }
}

/// Applies `checks` to the CSV files in `dir`. Returns the number of
/// checks evaluated.
pub fn validate_dir(dir: &Path, checks: &[Check]) -> CliResult<usize> {
    for check in checks {
        let path = dir.join(format!("{}.csv", check.table()));
        let (header, rows) = read_csv(&path)?;
        match check {
            Check::LessEq { lhs, rhs, tol, .. } => {
                let (a, b) = (column(&path, &header, lhs)?, column(&path, &header, rhs)?);
                for (k, r) in rows.iter().enumerate() {
                    if !(r[a] <= r[b] + tol) {
                        return Err(fail(&path, check, k, format!("{} > {}", r[a], r[b])));
                    }
                }
            }
            Check::AbsAtMost { col, bound, .. } => {
                let c = column(&path, &header, col)?;
                for (k, r) in rows.iter().enumerate() {
                    if !(r[c].abs() <= *bound) {
                        return Err(fail(&path, check, k, format!("value {}", r[c])));
                    }
                }
            }
            Check::NonDecreasing { col, tol, .. } => {
                let c = column(&path, &header, col)?;
                for (k, w) in rows.windows(2).enumerate() {
                    if !(w[1][c] >= w[0][c] - tol) {
                        return Err(fail(&path, check, k + 1, format!("{} -> {}", w[0][c], w[1][c])));
                    }
                }
            }
            Check::NonIncreasing { col, tol, .. } => {
                let c = column(&path, &header, col)?;
                for (k, w) in rows.windows(2).enumerate() {
                    if !(w[1][c] <= w[0][c] + tol) {
                        return Err(fail(&path, check, k + 1, format!("{} -> {}", w[0][c], w[1][c])));
                    }
                }
            }
        }
    }
    Ok(checks.len())
}
