use std::sync::Arc;

use oqsl_core::linalg;
use oqsl_core::opspace::{gibbs_metric, io, kubo_metric, metric_from_rho, MetricP, Operator};
use oqsl_core::oqsl::{
    autocorr_angle, autocorrelation, saturation_check, speed_limit_report, speeds, FieldValue, FlowPath,
};
use oqsl_core::sample::{random_hermitian, rng_from_seed, SeededRng};

use crate::config::Params;
use crate::error::{CliError, CliResult};
use crate::output::{Cell, Check, RunOutput, Table};

const ORDER_TOL: f64 = 1e-9;

fn named_operator(name: &str, dim: usize) -> Option<Operator> {
    match name {
        "pauli-x" => Some(Operator::pauli_x()),
        "pauli-y" => Some(Operator::pauli_y()),
        "pauli-z" => Some(Operator::pauli_z()),
        "identity" => Some(Operator::identity(dim)),
        _ => None,
    }
}

fn resolve(spec: Option<&str>, dim: usize, rng: &mut Option<SeededRng>, what: &str) -> CliResult<Operator> {
    match spec {
        Some(s) => match named_operator(s, dim) {
            Some(op) => Ok(op),
            None => Ok(io::read_operator(s)?),
        },
        None => {
            let rng = rng.as_mut().ok_or_else(|| {
                CliError::Config(format!("--seed is required when --{what} is not given (random input)"))
            })?;
            Ok(random_hermitian(dim, rng))
        }
    }
}

fn named_dim(spec: Option<&str>) -> Option<usize> {
    match spec {
        Some("pauli-x" | "pauli-y" | "pauli-z") => Some(2),
        _ => None,
    }
}

pub fn run(params: &Params) -> CliResult<RunOutput> {
    let (h_spec, a_spec) = (params.text("h"), params.text("a"));
    let dim = named_dim(h_spec)
        .or(named_dim(a_spec))
        .unwrap_or(params.usize("dim").expect("defaulted"));
    let mut rng = params.uint("seed").map(rng_from_seed);
    let h = resolve(h_spec, dim, &mut rng, "h")?;
    let a = resolve(a_spec, h.dim(), &mut rng, "a")?;
    if a.dim() != h.dim() {
        return Err(CliError::Config(format!(
            "operator dimension {} does not match the Hamiltonian dimension {}",
            a.dim(),
            h.dim()
        )));
    }
    h.require_hermitian()?;
    let beta = params.float("beta").expect("defaulted");
    let (metric, a) = match params.text("metric").expect("defaulted") {
        "hs" => (MetricP::hilbert_schmidt(h.dim()), a),
        "gibbs" => (gibbs_metric(&h, beta)?, a),
        "kubo" => {
            let k = kubo_metric(&h, beta)?;
            let centered = k.center(&a)?;
            (k.into_metric(), centered)
        }
        _ => {
            let (Some(r1), Some(r2)) = (params.text("rho1"), params.text("rho2")) else {
                return Err(CliError::Config("--metric rho needs --rho1 and --rho2".into()));
            };
            (metric_from_rho(&io::read_operator(r1)?, &io::read_operator(r2)?)?, a)
        }
    };
    let tau = params.float("tau").expect("defaulted");
    let n = params.usize("samples").expect("defaulted");
    let times: Vec<f64> = (0..=n).map(|k| tau * k as f64 / n as f64).collect();
    let path = FlowPath::constant(Arc::new(metric), &h, &a, times)?;

    let report = speed_limit_report(&path)?;
    let sat = saturation_check(&path)?;
    let mut out = RunOutput::default();

    let mut columns: Vec<String> = report.record().iter().map(|(k, _)| k.to_string()).collect();
    columns.extend(
        [
            "two_eigenspace",
            "krylov_dim",
            "equality_gap",
            "structure_residual",
            "norm_mismatch",
        ]
        .map(String::from),
    );
    let mut row: Vec<Cell> = report
        .record()
        .iter()
        .map(|(_, v)| match v {
            FieldValue::Real(x) => Cell::Num(*x),
            FieldValue::Flag(b) => Cell::Flag(*b),
        })
        .collect();
    row.extend([
        Cell::Flag(sat.two_eigenspace),
        Cell::from(sat.krylov_dim),
        Cell::Num(sat.equality_gap),
        Cell::Num(sat.structure_residual.unwrap_or(f64::NAN)),
        Cell::Num(sat.norm_mismatch.unwrap_or(f64::NAN)),
    ]);
    let mut table = Table::with_columns("bound_report", columns);
    table.push(row);
    out.tables.push(table);
    out.checks.extend([
        Check::less_eq("bound_report", "tau_qsl", "tau_ref", ORDER_TOL),
        Check::less_eq("bound_report", "tau_ref", "tau_oref", ORDER_TOL),
        Check::less_eq("bound_report", "tau_oref", "tau", ORDER_TOL),
    ]);

    let c = autocorrelation(&path)?;
    let v = speeds(&path)?;
    let c0 = c[0].re;
    let mut table = Table::new(
        "bound_path",
        &["t", "autocorr_re", "autocorr_im", "speed", "arc_length", "velocity_integral", "theta"],
    );
    let mut vi = 0.0;
    for k in 0..path.len() {
        let arc = c0.sqrt() * autocorr_angle(c0, c[k])?;
        if k > 0 {
            vi += linalg::trapezoid(&path.times()[k - 1..=k], &v[k - 1..=k]);
        }
        table.push(vec![
            Cell::Num(path.times()[k]),
            Cell::Num(c[k].re),
            Cell::Num(c[k].im),
            Cell::Num(v[k]),
            Cell::Num(arc),
            Cell::Num(vi),
            Cell::Num(sat.theta.get(k).copied().unwrap_or(f64::NAN)),
        ]);
    }
    out.tables.push(table);
    // arccos turns a rounding error eps in the deficit into sqrt(2 eps) in the angle
    let arc_tol = ORDER_TOL * (1.0 + c0.sqrt()) + (c0 * 32.0 * h.dim() as f64 * f64::EPSILON).sqrt();
    out.checks
        .push(Check::less_eq("bound_path", "arc_length", "velocity_integral", arc_tol));
    out.plots.push((
        "bound_path".into(),
        "t".into(),
        vec!["arc_length".into(), "velocity_integral".into()],
        false,
    ));

    out.note("dim", h.dim());
    out.note("tau_qsl", format!("{:e}", report.tau_qsl));
    out.note("tau_ref", format!("{:e}", report.tau_ref));
    out.note("tau_oref", format!("{:e}", report.tau_oref));
    out.note("stationary", report.stationary);
    out.note("kernel_invariant", report.kernel_invariant);
    out.note("ordering_holds", report.ordering_holds(ORDER_TOL));
    Ok(out)
}
