use oqsl_core::krylov::{
    complexity_autocorr, complexity_trajectory, complexity_velocity, geodesic_autocorr, lanczos, oqsl_k_on_chain,
    su2_chain, AlgebraParams, ChainSpectrum,
};
use oqsl_core::opspace::liouvillian;
use oqsl_core::oqsl::krylov_dimension;
use oqsl_core::sample::{random_hermitian, rng_from_seed};

use crate::config::Params;
use crate::error::{CliError, CliResult};
use crate::output::{Cell, Check, RunOutput, Table};

const SUBTRACTED_TOL: f64 = 1e-9;
const PLAIN_TOL: f64 = 1e-12;
const DISPERSION_TOL: f64 = 1e-8;
const LANCZOS_RESIDUAL_TOL: f64 = 1e-10;

pub fn run_su2(params: &Params) -> CliResult<RunOutput> {
    let alpha = params.float("alpha").expect("defaulted");
    if !(alpha < 0.0) {
        return Err(CliError::Config(format!(
            "--alpha {alpha}: a finite Krylov dimension needs alpha < 0; for alpha >= 0 the \
             complexity autocorrelation grows without bound and the arccos speed limit is undefined"
        )));
    }
    let d = params.usize("d").expect("defaulted");
    let p = AlgebraParams::su2(alpha, d)?;
    let chain = su2_chain(&p)?;
    let branch = std::f64::consts::PI / p.frequency();
    let t_max = params.float("t_max").unwrap_or(branch);
    if t_max > branch {
        return Err(CliError::Config(format!(
            "--t-max {t_max} leaves the first arccos branch [0, pi / sqrt|alpha|) = [0, {branch})"
        )));
    }
    let samples = params.usize("samples").expect("defaulted");
    let times: Vec<f64> = (0..samples).map(|k| t_max * k as f64 / samples as f64).collect();

    let (v_k, v_bar) = complexity_velocity(&chain);
    let k2 = chain.k_norm_sq();
    let kb2 = chain.k_bar_norm_sq();
    // <Kbar|Kbar_t> = <K|K_t> - (Tr K)^2 / D, since Tr K_t = Tr K
    let shift = chain.trace_k().powi(2) / d as f64;
    let numeric = if params.flag("cross_check") {
        let spec = ChainSpectrum::new(&chain);
        Some(spec.autocorrelation(&chain.k_op(), &times))
    } else {
        None
    };

    let mut cols = vec!["t", "autocorr", "geodesic", "lhs", "rhs", "gap"];
    if numeric.is_some() {
        cols.push("autocorr_spectrum");
    }
    let mut plain = Table::new(format!("krylov_su2_d{d}_plain"), &cols);
    let mut subtracted = Table::new(format!("krylov_su2_d{d}_subtracted"), &cols);
    let mut worst_sub = 0.0_f64;
    let mut worst_numeric = 0.0_f64;
    for (k, &t) in times.iter().enumerate() {
        let r = oqsl_k_on_chain(&p, &chain, t)?;
        let c = complexity_autocorr(&p, t)?.re;
        let mut row_p = vec![
            Cell::Num(t),
            Cell::Num(c),
            Cell::Num(geodesic_autocorr(k2, v_k, t)),
            Cell::Num(r.plain.lhs),
            Cell::Num(r.plain.rhs),
            Cell::Num(r.plain.gap()),
        ];
        let mut row_s = vec![
            Cell::Num(t),
            Cell::Num(c - shift),
            Cell::Num(geodesic_autocorr(kb2, v_bar, t)),
            Cell::Num(r.subtracted.lhs),
            Cell::Num(r.subtracted.rhs),
            Cell::Num(r.subtracted.gap()),
        ];
        if let Some(num) = &numeric {
            worst_numeric = worst_numeric.max((num[k].re - c).abs() / k2);
            row_p.push(Cell::Num(num[k].re));
            row_s.push(Cell::Num(num[k].re - shift));
        }
        worst_sub = worst_sub.max(r.subtracted.gap().abs());
        plain.push(row_p);
        subtracted.push(row_s);
    }
    let mut out = RunOutput::default();
    out.checks.extend([
        Check::less_eq(&plain.name, "rhs", "lhs", PLAIN_TOL),
        Check::less_eq(&subtracted.name, "rhs", "lhs", SUBTRACTED_TOL),
        Check::abs_at_most(&subtracted.name, "gap", SUBTRACTED_TOL),
    ]);
    for t in [&plain, &subtracted] {
        out.plots
            .push((t.name.clone(), "t".into(), vec!["autocorr".into(), "geodesic".into()], false));
    }
    out.tables.push(plain);
    out.tables.push(subtracted);
    out.note("gamma", format!("{:e}", p.gamma));
    out.note("b_1", format!("{:e}", chain.b1()));
    out.note("k_norm_sq", format!("{k2:e}"));
    out.note("k_bar_norm_sq", format!("{kb2:e}"));
    out.note("b_norm_sq", format!("{:e}", chain.b_norm_sq()));
    out.note("velocity_k", format!("{v_k:e}"));
    out.note("velocity_k_bar", format!("{v_bar:e}"));
    out.note("max_subtracted_gap", format!("{worst_sub:e}"));
    if numeric.is_some() {
        out.note("max_spectrum_autocorr_deviation", format!("{worst_numeric:e}"));
    }
    Ok(out)
}

pub fn run_lanczos(params: &Params) -> CliResult<RunOutput> {
    let dim = params.usize("dim").expect("defaulted");
    let mut rng = rng_from_seed(params.uint("seed").expect("required"));
    let h = random_hermitian(dim, &mut rng);
    let o = random_hermitian(dim, &mut rng);
    let basis = lanczos(&h, &o, None)?;
    let ortho = basis.orthonormality_residual()?;
    let tri = basis.tridiagonality_residual(&h)?;
    if ortho > LANCZOS_RESIDUAL_TOL || tri > LANCZOS_RESIDUAL_TOL {
        return Err(CliError::Numerical(format!(
            "Lanczos residuals exceed {LANCZOS_RESIDUAL_TOL:e}: orthonormality {ortho:e}, tridiagonality {tri:e}"
        )));
    }
    let support = krylov_dimension(&liouvillian(&h), &o, 1e-8)?;
    if support != basis.d {
        return Err(CliError::Numerical(format!(
            "Krylov dimension {} disagrees with the eigenspace support count {support}",
            basis.d
        )));
    }

    let mut coeffs = Table::new("lanczos_coefficients", &["n", "a_n", "b_n"]);
    for n in 0..basis.d {
        let b = if n == 0 { 0.0 } else { basis.lanczos_b[n - 1] };
        coeffs.push(vec![Cell::from(n), Cell::Num(basis.lanczos_a[n]), Cell::Num(b)]);
    }

    let chain = basis.chain()?;
    let t_max = params.float("t_max").expect("defaulted");
    let samples = params.usize("samples").expect("defaulted");
    let times: Vec<f64> = (0..samples).map(|k| t_max * k as f64 / (samples - 1) as f64).collect();
    let tr = complexity_trajectory(&chain, &times);
    let two_b1 = 2.0 * chain.b1();
    let mut growth = Table::new(
        "lanczos_complexity",
        &["t", "complexity", "delta_k", "dk_dt", "abs_dk_dt", "bound", "residual"],
    );
    for k in 0..tr.t.len() {
        growth.push(vec![
            Cell::Num(tr.t[k]),
            Cell::Num(tr.k[k]),
            Cell::Num(tr.delta_k[k]),
            Cell::Num(tr.dk_dt[k]),
            Cell::Num(tr.dk_dt[k].abs()),
            Cell::Num(two_b1 * tr.delta_k[k]),
            Cell::Num(tr.residual[k]),
        ]);
    }
    let mut out = RunOutput::default();
    out.checks
        .push(Check::less_eq("lanczos_complexity", "abs_dk_dt", "bound", DISPERSION_TOL));
    out.plots.push((
        "lanczos_complexity".into(),
        "t".into(),
        vec!["abs_dk_dt".into(), "bound".into()],
        false,
    ));
    out.tables.push(coeffs);
    out.tables.push(growth);
    out.note("krylov_dim", basis.d);
    out.note("eigenspace_support", support);
    out.note("orthonormality_residual", format!("{ortho:e}"));
    out.note("tridiagonality_residual", format!("{tri:e}"));
    out.note("min_dispersion_residual", format!("{:e}", tr.min_residual()));
    Ok(out)
}
