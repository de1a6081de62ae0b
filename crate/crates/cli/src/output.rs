//! Tables, CSV files with a commented metadata block, and `.meta` sidecars.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde_json::{json, Value as Json};

use crate::config::ExperimentConfig;
use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Flag(bool),
}

impl Cell {
    /// Shortest round-trip text, so identical values always print identically.
    pub fn render(&self) -> String {
        match self {
            Cell::Num(x) => format!("{x:e}"),
            Cell::Int(n) => n.to_string(),
            Cell::Flag(b) => b.to_string(),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<usize> for Cell {
    fn from(n: usize) -> Self {
        Cell::Int(n as i64)
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Flag(b)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    /// File stem of the CSV.
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: impl Into<String>, columns: &[&str]) -> Self {
        Self {
            name: name.into(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn with_columns(name: impl Into<String>, columns: Vec<String>) -> Self {
        Self {
            name: name.into(),
            columns,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.columns.iter().position(|c| c == name)?;
        Some(
            self.rows
                .iter()
                .map(|r| match r[k] {
                    Cell::Num(x) => x,
                    Cell::Int(n) => n as f64,
                    Cell::Flag(b) => f64::from(u8::from(b)),
                })
                .collect(),
        )
    }
}

/// Row-wise inequality re-checked on the written files.
#[derive(Debug, Clone, PartialEq)]
pub enum Check {
    /// `lhs <= rhs + tol` on every row.
    LessEq {
        table: String,
        lhs: String,
        rhs: String,
        tol: f64,
    },
    /// `|col| <= bound` on every row.
    AbsAtMost { table: String, col: String, bound: f64 },
    /// `col[k+1] >= col[k] - tol`.
    NonDecreasing { table: String, col: String, tol: f64 },
    /// `col[k+1] <= col[k] + tol`.
    NonIncreasing { table: String, col: String, tol: f64 },
}

impl Check {
    pub fn less_eq(table: &str, lhs: &str, rhs: &str, tol: f64) -> Self {
        Check::LessEq {
            table: table.into(),
            lhs: lhs.into(),
            rhs: rhs.into(),
            tol,
        }
    }

    pub fn abs_at_most(table: &str, col: &str, bound: f64) -> Self {
        Check::AbsAtMost {
            table: table.into(),
            col: col.into(),
            bound,
        }
    }

    pub fn non_decreasing(table: &str, col: &str, tol: f64) -> Self {
        Check::NonDecreasing {
            table: table.into(),
            col: col.into(),
            tol,
        }
    }

    pub fn non_increasing(table: &str, col: &str, tol: f64) -> Self {
        Check::NonIncreasing {
            table: table.into(),
            col: col.into(),
            tol,
        }
    }

    pub fn table(&self) -> &str {
        match self {
            Check::LessEq { table, .. }
            | Check::AbsAtMost { table, .. }
            | Check::NonDecreasing { table, .. }
            | Check::NonIncreasing { table, .. } => table,
        }
    }

    pub fn describe(&self) -> String {
        match self {
            Check::LessEq { lhs, rhs, tol, .. } => format!("{lhs} <= {rhs} + {tol:e}"),
            Check::AbsAtMost { col, bound, .. } => format!("|{col}| <= {bound:e}"),
            Check::NonDecreasing { col, tol, .. } => format!("{col} non-decreasing (slack {tol:e})"),
            Check::NonIncreasing { col, tol, .. } => format!("{col} non-increasing (slack {tol:e})"),
        }
    }
}

/// Everything a command produces.
#[derive(Debug, Clone, Default)]
pub struct RunOutput {
    pub tables: Vec<Table>,
    pub checks: Vec<Check>,
    /// Scalar results recorded in metadata blocks and sidecars.
    pub summary: BTreeMap<String, String>,
    /// `(table, x column, y columns, log x)` plotted with `--emit-svg`.
    pub plots: Vec<(String, String, Vec<String>, bool)>,
}

impl RunOutput {
    pub fn note(&mut self, key: &str, value: impl ToString) {
        self.summary.insert(key.to_string(), value.to_string());
    }
}

fn metadata_lines(config: &ExperimentConfig, table: &Table, summary: &BTreeMap<String, String>) -> Vec<String> {
    let mut lines = vec![
        format!("# generator: oqsl {}", env!("CARGO_PKG_VERSION")),
        format!("# command: {}", config.command.name()),
        format!("# table: {}", table.name),
    ];
    for (k, v) in config.params.canonical() {
        lines.push(format!("# param.{k}: {v}"));
    }
    for (k, v) in summary {
        lines.push(format!("# result.{k}: {v}"));
    }
    lines
}

pub fn write_csv(path: &Path, metadata: &[String], table: &Table) -> CliResult<()> {
    let file = File::create(path).map_err(CliError::io(path))?;
    let mut out = BufWriter::new(file);
    for line in metadata {
        writeln!(out, "{line}").map_err(CliError::io(path))?;
    }
    let csv_err = |source| CliError::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut w = csv::Writer::from_writer(out);
    w.write_record(&table.columns).map_err(csv_err)?;
    for row in &table.rows {
        w.write_record(row.iter().map(Cell::render)).map_err(csv_err)?;
    }
    w.flush().map_err(CliError::io(path))?;
    Ok(())
}

fn sidecar(config: &ExperimentConfig, table: &Table, run: &RunOutput) -> Json {
    let checks: Vec<String> = run
        .checks
        .iter()
        .filter(|c| c.table() == table.name)
        .map(Check::describe)
        .collect();
    json!({
        "generator": format!("oqsl {}", env!("CARGO_PKG_VERSION")),
        "command": config.command.name(),
        "table": table.name,
        "file": format!("{}.csv", table.name),
        "columns": table.columns,
        "rows": table.rows.len(),
        "params": config.params.canonical(),
        "results": run.summary,
        "checks": checks,
    })
}

/// Writes every table as `<output>/<name>.csv` plus `<name>.meta`, and
/// returns the CSV paths.
pub fn write_all(config: &ExperimentConfig, run: &RunOutput) -> CliResult<Vec<PathBuf>> {
    std::fs::create_dir_all(&config.output).map_err(CliError::io(&config.output))?;
    let mut paths = Vec::new();
    for table in &run.tables {
        let path = config.output.join(format!("{}.csv", table.name));
        write_csv(&path, &metadata_lines(config, table, &run.summary), table)?;
        let meta_path = config.output.join(format!("{}.meta", table.name));
        let text = serde_json::to_string_pretty(&sidecar(config, table, run)).expect("json values serialize");
        std::fs::write(&meta_path, text + "\n").map_err(CliError::io(&meta_path))?;
        paths.push(path);
    }
    Ok(paths)
}

/// Reads a CSV written by [`write_csv`]: metadata lines are skipped,
/// every cell parsed as a number (`true`/`false` as 1/0).
pub fn read_csv(path: &Path) -> CliResult<(Vec<String>, Vec<Vec<f64>>)> {
    let csv_err = |source| CliError::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut r = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(csv_err)?;
    let header: Vec<String> = r.headers().map_err(csv_err)?.iter().map(str::to_string).collect();
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(csv_err)?;
        let row = rec
            .iter()
            .map(|s| match s {
                "true" => Ok(1.0),
                "false" => Ok(0.0),
                _ => s.parse::<f64>().map_err(|_| CliError::Validation {
                    file: path.to_path_buf(),
                    reason: format!("unparseable cell '{s}'"),
                }),
            })
            .collect::<CliResult<Vec<f64>>>()?;
        rows.push(row);
    }
    Ok((header, rows))
}
