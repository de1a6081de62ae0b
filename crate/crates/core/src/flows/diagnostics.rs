use super::generators::GeneratorKind;
use super::integrate::{integrate_flow, FlowOptions, FlowTrajectory, SampleGrid};
use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::ode::OdeOptions;
use crate::opspace::{vectorize, Operator};

/// `A_Q(l) = 1 - ||H_T||^2 / ||H||^2`, evaluated as
/// `sum_{m != n} |H_mn|^2 / ||H||^2` to avoid cancellation.
pub fn offdiag_overlap(traj: &FlowTrajectory) -> Result<Vec<f64>> {
    traj.hamiltonians
        .iter()
        .zip(&traj.offdiag_sq)
        .map(|(h, off)| {
            let n = h.hs_norm().powi(2);
            if n == 0.0 {
                Err(Error::ZeroOperator)
            } else {
                Ok(off / n)
            }
        })
        .collect()
}

/// `<H|Q|H>` with `Q = 1 - |H_T><H_T|` on normalized vectorized operators.
pub fn offdiag_overlap_superop(h: &Operator) -> Result<f64> {
    let vh = vectorize(h)?;
    let target = h.diagonal_part();
    let n2 = h.dim() * h.dim();
    let mut q = CMatrix::identity(n2, n2);
    if target.hs_norm() > 0.0 {
        let vt = vectorize(&target)?;
        q -= &vt * vt.adjoint();
    }
    Ok((vh.adjoint() * q * &vh)[(0, 0)].re)
}

/// `-2 sum_{i,j} (e_i - e_j)^2 |H_ij|^2` with `e` the diagonal of `h`.
pub fn dephasing_rate(h: &Operator) -> f64 {
    let n = h.dim();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            let d = h.get(i, i).re - h.get(j, j).re;
            s += d * d * h.get(i, j).norm_sqr();
        }
    }
    -2.0 * s
}

/// Step of the finite-difference stencil for a unit spectral width; the
/// flow time scales as `1 / width^2`, so the step used is
/// `DEPHASING_FD_STEP / max(1, width^2)`.
pub const DEPHASING_FD_STEP: f64 = 1e-2;

/// Compares a numerical derivative of `Tr H_off^2` along a Wegner trajectory
/// with the closed-form dephasing rate at every sample. Returns the largest
/// absolute residual.
///
/// The derivative is a five-point central difference whose stencil values
/// come from short, tightly converged integrations started at each sample.
/// The step shrinks with the spectral width of `H`.
pub fn dephasing_rate_check(traj: &FlowTrajectory) -> Result<f64> {
    if traj.kind != GeneratorKind::Wegner {
        return Err(Error::NotApplicable(format!(
            "the dephasing identity holds for the Wegner generator only, not '{}'",
            traj.kind.name()
        )));
    }
    let width = traj.spectrum.last().copied().unwrap_or(0.0) - traj.spectrum.first().copied().unwrap_or(0.0);
    let d = DEPHASING_FD_STEP / (width * width).max(1.0);
    let tight = FlowOptions {
        ode: OdeOptions {
            rtol: 1e-13,
            atol: 1e-15,
            ..OdeOptions::default()
        },
        invariant_tol: 1e-8,
        abort_factor: 100.0,
        samples: SampleGrid::Uniform(3),
    };
    let mut worst = 0.0_f64;
    for h in &traj.hamiltonians {
        let analytic = dephasing_rate(h);
        if h.off_diagonal_sq() == 0.0 {
            worst = worst.max(analytic.abs());
            continue;
        }
        let side = |dir: f64| -> Result<(f64, f64)> {
            let opts = FlowOptions {
                samples: SampleGrid::Explicit(vec![0.0, d, 2.0 * d]),
                ..tight.clone()
            };
            let kind = if dir > 0.0 {
                GeneratorKind::Wegner
            } else {
                reversed_wegner()
            };
            let tr = integrate_flow(h.clone(), &kind, 2.0 * d, &opts)?;
            Ok((tr.offdiag_sq[1], tr.offdiag_sq[2]))
        };
        let (p1, p2) = side(1.0)?;
        let (m1, m2) = side(-1.0)?;
        let numeric = (m2 - 8.0 * m1 + 8.0 * p1 - p2) / (12.0 * d);
        worst = worst.max((numeric - analytic).abs());
    }
    Ok(worst)
}

/// Wegner flow run backwards in `l`: `eta -> -eta`.
fn reversed_wegner() -> GeneratorKind {
    GeneratorKind::Custom(std::sync::Arc::new(|_, h: &Operator| {
        let n = h.dim();
        let m = CMatrix::from_fn(n, n, |i, j| (h.get(j, j) - h.get(i, i)) * h.get(i, j));
        Operator::new(m).expect("square")
    }))
}

/// Speed-limit view of a flow trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowOqsl {
    pub l: Vec<f64>,
    pub theta: Vec<f64>,
    pub velocity_integral: Vec<f64>,
    /// `l * theta(l) / velocity_integral(l)`, with the limit 0 where the
    /// velocity integral vanishes.
    pub l_qsl: Vec<f64>,
}

pub fn flow_oqsl(traj: &FlowTrajectory) -> FlowOqsl {
    let l_qsl = traj
        .grid
        .iter()
        .zip(traj.theta.iter().zip(&traj.velocity_integral))
        .map(|(&l, (&th, &vi))| if vi > 0.0 { l * th / vi } else { 0.0 })
        .collect();
    FlowOqsl {
        l: traj.grid.clone(),
        theta: traj.theta.clone(),
        velocity_integral: traj.velocity_integral.clone(),
        l_qsl,
    }
}

/// Largest decrease of any partial trace `sum_{n<=k} H_nn` between
/// consecutive samples (zero when all are non-decreasing).
pub fn partial_trace_decrease(traj: &FlowTrajectory) -> f64 {
    let pt = traj.partial_traces();
    pt.windows(2)
        .flat_map(|w| w[0].iter().zip(&w[1]).map(|(a, b)| (a - b).max(0.0)).collect::<Vec<_>>())
        .fold(0.0, f64::max)
}

/// Largest increase of `A_Q` between consecutive samples.
pub fn overlap_increase(traj: &FlowTrajectory) -> Result<f64> {
    let a = offdiag_overlap(traj)?;
    Ok(a.windows(2).map(|w| (w[1] - w[0]).max(0.0)).fold(0.0, f64::max))
}

/// Largest absolute off-band entry along the trajectory.
pub fn max_off_band(traj: &FlowTrajectory) -> f64 {
    traj.hamiltonians
        .iter()
        .flat_map(|h| {
            let n = h.dim();
            (0..n).flat_map(move |i| (0..n).filter(move |j| i.abs_diff(*j) > 1).map(move |j| h.get(i, j).norm()))
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flows::TridiagonalHamiltonian;
    use crate::Complex64;

    #[test]
    fn overlap_examples() {
        assert!(offdiag_overlap_superop(&Operator::from_diagonal(&[1.0, 2.0])).unwrap().abs() < 1e-15);
        assert!((offdiag_overlap_superop(&Operator::pauli_x()).unwrap() - 1.0).abs() < 1e-15);
        let h = TridiagonalHamiltonian::new(vec![0.3, -0.2, 0.5], vec![0.7, 0.1]).unwrap().to_operator();
        let direct = h.off_diagonal_sq() / h.hs_norm().powi(2);
        assert!((offdiag_overlap_superop(&h).unwrap() - direct).abs() < 1e-14);
    }

    #[test]
    fn dephasing_refuses_toda() {
        let h = TridiagonalHamiltonian::new(vec![0.3, -0.2], vec![0.7]).unwrap();
        let tr = integrate_flow(h, &GeneratorKind::Toda, 1.0, &FlowOptions::default()).unwrap();
        assert!(matches!(dephasing_rate_check(&tr), Err(Error::NotApplicable(_))));
    }

    #[test]
    fn dephasing_identity_on_small_case() {
        let h = Operator::from_rows(
            3,
            &[0.2, 0.5, -0.1, 0.5, -0.6, 0.3, -0.1, 0.3, 0.9].map(|x| Complex64::new(x, 0.0)),
        )
        .unwrap();
        let opts = FlowOptions {
            samples: SampleGrid::Uniform(5),
            ..FlowOptions::default()
        };
        let tr = integrate_flow(h, &GeneratorKind::Wegner, 2.0, &opts).unwrap();
        assert!(dephasing_rate_check(&tr).unwrap() < 1e-6);
        let diag = integrate_flow(Operator::from_diagonal(&[1.0, 0.0]), &GeneratorKind::Wegner, 1.0, &opts).unwrap();
        assert_eq!(dephasing_rate_check(&diag).unwrap(), 0.0);
    }

    #[test]
    fn oqsl_limit_at_zero() {
        let h = TridiagonalHamiltonian::new(vec![0.3, -0.2], vec![0.7]).unwrap();
        let tr = integrate_flow(h, &GeneratorKind::Toda, 1.0, &FlowOptions::default()).unwrap();
        let q = flow_oqsl(&tr);
        assert_eq!(q.l_qsl[0], 0.0);
        for (l, lq) in q.l.iter().zip(&q.l_qsl) {
            assert!(*lq <= l * (1.0 + 1e-9) + 1e-12);
        }
    }
}
