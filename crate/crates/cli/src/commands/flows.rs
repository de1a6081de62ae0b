use oqsl_core::flows::{
    default_l_max, flow_oqsl, integrate_flow, offdiag_overlap, random_tridiagonal, random_tridiagonal_traceless,
    toda_tight_family, FlowInput, FlowOptions, FlowTrajectory, GeneratorKind, SampleGrid,
};
use oqsl_core::ode::OdeOptions;
use rayon::prelude::*;

use crate::config::Params;
use crate::error::{CliError, CliResult};
use crate::output::{Cell, Check, RunOutput, Table};

const BOUND_TOL: f64 = 1e-9;
const MONOTONE_TOL: f64 = 1e-10;
const TIGHT_FAMILY_TOL: f64 = 1e-6;
const TIGHT_EQUALITY_TOL: f64 = 1e-8;

fn ode_options(params: &Params) -> OdeOptions {
    OdeOptions {
        rtol: params.float("rtol").expect("defaulted"),
        atol: params.float("atol").expect("defaulted"),
        ..OdeOptions::default()
    }
}

struct FlowRun {
    n: usize,
    l_max: f64,
    traj: FlowTrajectory,
}

fn run_one(kind: &GeneratorKind, n: usize, params: &Params) -> CliResult<FlowRun> {
    let seed = params.uint("seed").expect("required");
    let t = if params.flag("traceless") {
        random_tridiagonal_traceless(n, seed)?
    } else {
        random_tridiagonal(n, seed)?
    };
    let input = FlowInput::Tridiagonal(t);
    let l_max = params.float("l_max").unwrap_or_else(|| default_l_max(&input));
    let samples = params.usize("samples").expect("defaulted");
    let grid = match params.text("grid").expect("defaulted") {
        "uniform" => SampleGrid::Uniform(samples),
        _ => SampleGrid::Log {
            n: samples,
            l_min: params.float("l_min").expect("defaulted").min(0.5 * l_max),
        },
    };
    let opts = FlowOptions {
        ode: ode_options(params),
        samples: grid,
        ..FlowOptions::default()
    };
    let traj = integrate_flow(input, kind, l_max, &opts)
        .map_err(|e| CliError::Numerical(format!("{} flow, N = {n}: {e}", kind.name())))?;
    if traj.stalled {
        log::warn!("{} flow, N = {n}: generator vanished with off-diagonal weight left", kind.name());
    }
    Ok(FlowRun { n, l_max, traj })
}

fn trajectory_table(kind: &GeneratorKind, name: &str, run: &FlowRun) -> CliResult<Table> {
    let traj = &run.traj;
    let q = flow_oqsl(traj);
    let overlap = offdiag_overlap(traj)?;
    let mut columns: Vec<String> = ["l", "theta", "velocity_integral", "l_qsl", "offdiag_overlap", "offdiag_sq"]
        .map(String::from)
        .to_vec();
    let toda = *kind == GeneratorKind::Toda;
    let partial = traj.partial_traces();
    if toda {
        columns.extend((1..=run.n).map(|k| format!("partial_trace_{k}")));
    }
    let mut table = Table::with_columns(name, columns);
    for k in 0..traj.len() {
        let mut row = vec![
            Cell::Num(q.l[k]),
            Cell::Num(q.theta[k]),
            Cell::Num(q.velocity_integral[k]),
            Cell::Num(q.l_qsl[k]),
            Cell::Num(overlap[k]),
            Cell::Num(traj.offdiag_sq[k]),
        ];
        if toda {
            row.extend(partial[k].iter().map(|&x| Cell::Num(x)));
        }
        table.push(row);
    }
    Ok(table)
}

fn flow_checks(kind: &GeneratorKind, name: &str, n: usize) -> Vec<Check> {
    let mut checks = vec![
        Check::less_eq(name, "theta", "velocity_integral", BOUND_TOL),
        Check::less_eq(name, "l_qsl", "l", BOUND_TOL),
    ];
    match kind {
        GeneratorKind::Wegner => checks.push(Check::non_increasing(name, "offdiag_overlap", MONOTONE_TOL)),
        _ => checks.extend((1..=n).map(|k| Check::non_decreasing(name, &format!("partial_trace_{k}"), MONOTONE_TOL))),
    }
    checks
}

/// Wegner or Toda flow; several `n` values run in parallel as an N-sweep.
pub fn run(kind: GeneratorKind, params: &Params) -> CliResult<RunOutput> {
    let seed = params.uint("seed").expect("required");
    let ns: Vec<usize> = params.uint_list("n").expect("required").iter().map(|&n| n as usize).collect();
    let runs: Vec<FlowRun> = ns.par_iter().map(|&n| run_one(&kind, n, params)).collect::<CliResult<_>>()?;

    let mut out = RunOutput::default();
    let sweep = runs.len() > 1;
    let mut summary = Table::new(
        format!("{}_sweep_seed{seed}", kind.name()),
        &[
            "n",
            "l_max",
            "theta_end",
            "velocity_integral_end",
            "l_qsl_end",
            "offdiag_sq_end",
            "max_spectrum_drift",
        ],
    );
    for run in &runs {
        let name = format!("{}_n{}_seed{seed}", kind.name(), run.n);
        out.tables.push(trajectory_table(&kind, &name, run)?);
        out.checks.extend(flow_checks(&kind, &name, run.n));
        out.plots.push((name, "l".into(), vec!["theta".into(), "velocity_integral".into()], true));

        let t = &run.traj;
        let last = t.len() - 1;
        let q = flow_oqsl(t);
        let prefix = if sweep { format!("n{}.", run.n) } else { String::new() };
        out.note(&format!("{prefix}l_max"), format!("{:e}", run.l_max));
        out.note(&format!("{prefix}max_spectrum_drift"), format!("{:e}", t.max_spectrum_drift));
        out.note(&format!("{prefix}max_norm_drift"), format!("{:e}", t.max_norm_drift));
        out.note(&format!("{prefix}offdiag_sq_end"), format!("{:e}", t.offdiag_sq[last]));
        out.note(&format!("{prefix}accepted_steps"), t.stats.accepted);
        summary.push(vec![
            Cell::from(run.n),
            Cell::Num(run.l_max),
            Cell::Num(t.theta[last]),
            Cell::Num(t.velocity_integral[last]),
            Cell::Num(q.l_qsl[last]),
            Cell::Num(t.offdiag_sq[last]),
            Cell::Num(t.max_spectrum_drift),
        ]);
    }
    if sweep {
        let name = summary.name.clone();
        out.checks.push(Check::less_eq(&name, "theta_end", "velocity_integral_end", BOUND_TOL));
        out.plots.push((name, "n".into(), vec!["theta_end".into(), "l_qsl_end".into()], false));
        out.tables.push(summary);
    }
    Ok(out)
}

/// Toda flow from the closed-form saturating family, compared with the
/// family along the way.
pub fn run_tight(params: &Params) -> CliResult<RunOutput> {
    let n = params.usize("n").expect("required");
    let family = toda_tight_family(
        n,
        params.float("h1").expect("defaulted"),
        params.float("theta0").expect("defaulted"),
    )?;
    let l_max = params.float("l_max").unwrap_or(8.0 * family.l0());
    let opts = FlowOptions {
        ode: ode_options(params),
        samples: SampleGrid::Uniform(params.usize("samples").expect("defaulted")),
        ..FlowOptions::default()
    };
    let traj = integrate_flow(family.initial(), &GeneratorKind::Toda, l_max, &opts)
        .map_err(|e| CliError::Numerical(format!("toda flow, N = {n}: {e}")))?;
    let bands = traj.tridiagonal.as_ref().expect("band coordinates for tridiagonal Toda input");

    let name = format!("toda_tight_n{n}");
    let mut table = Table::new(
        name.clone(),
        &[
            "l",
            "l_over_l0",
            "theta",
            "theta_closed_form",
            "velocity_integral",
            "saturation_gap",
            "family_deviation",
            "h_1",
            "v_1",
        ],
    );
    let theta0 = family.theta(0.0);
    let mut worst_dev = 0.0_f64;
    let mut worst_gap = 0.0_f64;
    for (k, &l) in traj.grid.iter().enumerate() {
        let want = family.at(l);
        let got = &bands[k];
        let dev = want
            .diag()
            .iter()
            .chain(want.offdiag())
            .zip(got.diag().iter().chain(got.offdiag()))
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        let gap = traj.velocity_integral[k] - traj.theta[k];
        worst_dev = worst_dev.max(dev);
        worst_gap = worst_gap.max(gap.abs());
        table.push(vec![
            Cell::Num(l),
            Cell::Num(l / family.l0()),
            Cell::Num(traj.theta[k]),
            Cell::Num(family.theta(l) - theta0),
            Cell::Num(traj.velocity_integral[k]),
            Cell::Num(gap),
            Cell::Num(dev),
            Cell::Num(got.diag()[0]),
            Cell::Num(got.offdiag()[0]),
        ]);
    }
    let mut out = RunOutput::default();
    out.tables.push(table);
    out.checks.extend([
        Check::less_eq(&name, "theta", "velocity_integral", BOUND_TOL),
        Check::abs_at_most(&name, "saturation_gap", TIGHT_EQUALITY_TOL),
        Check::abs_at_most(&name, "family_deviation", TIGHT_FAMILY_TOL),
    ]);
    out.plots.push((
        name,
        "l_over_l0".into(),
        vec!["theta".into(), "velocity_integral".into()],
        false,
    ));
    out.note("l0", format!("{:e}", family.l0()));
    out.note("rate", format!("{:e}", family.rate()));
    out.note("max_family_deviation", format!("{worst_dev:e}"));
    out.note("max_saturation_gap", format!("{worst_gap:e}"));
    Ok(out)
}
