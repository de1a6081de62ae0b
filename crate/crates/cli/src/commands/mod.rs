mod bound;
mod flows;
mod krylov;

use oqsl_core::flows::GeneratorKind;

use crate::config::{Command, ExperimentConfig};
use crate::error::CliResult;
use crate::output::RunOutput;

/// Runs the computation of `config` without touching the file system.
pub fn execute(config: &ExperimentConfig) -> CliResult<RunOutput> {
    let p = &config.params;
    match config.command {
        Command::Bound => bound::run(p),
        Command::Wegner => flows::run(GeneratorKind::Wegner, p),
        Command::Toda => flows::run(GeneratorKind::Toda, p),
        Command::TodaTight => flows::run_tight(p),
        Command::KrylovSu2 => krylov::run_su2(p),
        Command::KrylovLanczos => krylov::run_lanczos(p),
    }
}
