//! Experiment runner: one subcommand per experiment, each writing CSV
//! tables with a commented metadata block, a JSON `.meta` sidecar per table
//! and optional SVG plots.
//!
//! Exit codes: 0 success, 2 configuration error, 3 numerical invariant
//! violation (including a failed post-write validation), 1 i/o failure.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod svg;
pub mod validate;

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Arg, ArgAction, ArgMatches};

use config::{Command, ExperimentConfig, Kind};
use error::{CliError, CliResult};

pub fn cli() -> clap::Command {
    let mut app = clap::Command::new("oqsl")
        .version(env!("CARGO_PKG_VERSION"))
        .about("Operator speed limits, Wegner/Toda flows and Krylov complexity experiments")
        .subcommand_required(true)
        .arg_required_else_help(true);
    for command in Command::ALL {
        let mut sub = clap::Command::new(command.name())
            .about(command.about())
            .after_help(config::schema_dump(command))
            .arg(
                Arg::new("config")
                    .long("config")
                    .value_name("FILE")
                    .help("key = value parameter file; command-line flags take precedence"),
            )
            .arg(
                Arg::new("output")
                    .long("output")
                    .short('o')
                    .value_name("DIR")
                    .help("output directory [default: out]"),
            )
            .arg(
                Arg::new("emit_svg")
                    .long("emit-svg")
                    .action(ArgAction::SetTrue)
                    .help("also write SVG plots"),
            );
        for spec in command.schema() {
            let mut arg = Arg::new(spec.key).long(spec.key.replace('_', "-")).help(spec.help);
            arg = match spec.kind {
                Kind::Flag => arg
                    .num_args(0..=1)
                    .default_missing_value("true")
                    .value_name("BOOL"),
                _ => arg.value_name(spec.key.to_uppercase()),
            };
            sub = sub.arg(arg);
        }
        app = app.subcommand(sub);
    }
    app
}

fn config_from_matches(command: Command, m: &ArgMatches) -> CliResult<ExperimentConfig> {
    let mut raw = BTreeMap::new();
    for spec in command.schema() {
        if let Some(v) = m.get_one::<String>(spec.key) {
            raw.insert(spec.key.to_string(), v.clone());
        }
    }
    let file = m
        .get_one::<String>("config")
        .map(|p| config::read_config_file(Path::new(p)))
        .transpose()?;
    config::build(
        command,
        file,
        raw,
        m.get_one::<String>("output").map(PathBuf::from),
        m.get_flag("emit_svg"),
    )
}

fn write_diagnostics(config: &ExperimentConfig, err: &CliError) {
    let path = config.output.join("diagnostics.txt");
    let mut text = format!("command: {}\nerror: {err}\n", config.command.name());
    for (k, v) in config.params.canonical() {
        text.push_str(&format!("param.{k}: {v}\n"));
    }
    if std::fs::create_dir_all(&config.output).is_ok() && std::fs::write(&path, text).is_ok() {
        eprintln!("diagnostics written to {}", path.display());
    }
}

/// Runs a validated configuration end to end: compute, write, re-validate,
/// plot. Returns the written CSV paths.
pub fn run_config(config: &ExperimentConfig) -> CliResult<Vec<PathBuf>> {
    let run = commands::execute(config).inspect_err(|e| {
        if e.exit_code() == 3 {
            write_diagnostics(config, e);
        }
    })?;
    let paths = output::write_all(config, &run)?;
    validate::validate_dir(&config.output, &run.checks).inspect_err(|e| write_diagnostics(config, e))?;
    if config.emit_svg {
        for (table, x, ys, log_x) in &run.plots {
            let Some(t) = run.tables.iter().find(|t| &t.name == table) else {
                continue;
            };
            if let Some(svg) = svg::line_plot(t, x, ys, *log_x) {
                let path = config.output.join(format!("{table}.svg"));
                std::fs::write(&path, svg).map_err(CliError::io(&path))?;
            }
        }
    }
    Ok(paths)
}

/// Parses `args` (program name first) and runs the selected command.
/// Returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let matches = match cli().try_get_matches_from(args) {
        Ok(m) => m,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let (name, sub) = matches.subcommand().expect("subcommand required");
    let command = Command::from_name(name).expect("registered subcommand");
    let result = config_from_matches(command, sub).and_then(|config| {
        let paths = run_config(&config)?;
        for p in paths {
            println!("{}", p.display());
        }
        Ok(())
    });
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
