use crate::error::Result;
use crate::linalg::{self, I};
use crate::opspace::{hs_inner, liouvillian, Operator};

use super::path::FlowPath;
use super::report::speed_limit_report;
use super::stationary::eigen_components;

/// Support below this fraction of `|A^|` is treated as absent.
pub const SUPPORT_TOL: f64 = 1e-8;

/// Checks of the great-circle structure
/// `A^_t = P_0 + cos(theta) X_w + sin(theta) Y_w`, `theta(t) = int_0^t w`.
#[derive(Debug, Clone, PartialEq)]
pub struct SaturationReport {
    /// Moving support lies in a single eigenspace of `L` or in a `+-w` pair.
    pub two_eigenspace: bool,
    /// Eigenspaces of `L` carrying support, kernel included.
    pub krylov_dim: usize,
    /// `tau - tau_oref`.
    pub equality_gap: f64,
    /// No moving support at all; `theta` is identically zero.
    pub degenerate: bool,
    /// All generators commute with the first one.
    pub commuting: bool,
    pub frequency: f64,
    /// `theta(t_k)` on the path grid.
    pub theta: Vec<f64>,
    /// `max_k |A^_t - (P_0 + cos X + sin Y)| / |A^|`, when two_eigenspace.
    pub structure_residual: Option<f64>,
    /// `|Re<P_0|X>|`, `|Re<P_0|Y>|`, `|Re<P_w|P_-w>|`, relative to `|A^|^2`.
    pub orthogonality: Option<[f64; 3]>,
    /// `| |X| - |Y| | / |A^|`.
    pub norm_mismatch: Option<f64>,
}

pub fn saturation_check(path: &FlowPath) -> Result<SaturationReport> {
    let metric = path.metric();
    let gens = path.generators();
    let h0 = &gens[0];
    let a_hat = metric.project(&path.states()[0])?;
    let norm = metric.seminorm(&a_hat)?;
    let report = speed_limit_report(path)?;

    let hs = h0.hs_norm().powi(2).max(f64::MIN_POSITIVE);
    let commuting = gens
        .iter()
        .map(|g| g.commutator(h0).map(|c| c.hs_norm()))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .all(|c| c <= 1e-10 * hs);

    let comps = eigen_components(&liouvillian(h0), &a_hat)?;
    let mut supported = Vec::new();
    for (omega, c) in comps {
        if metric.seminorm(&c)? > SUPPORT_TOL * norm {
            supported.push((omega, c));
        }
    }
    let krylov_dim = supported.len();
    let p0 = supported
        .iter()
        .find(|(w, _)| *w == 0.0)
        .map(|(_, c)| c.clone())
        .unwrap_or_else(|| Operator::zeros(h0.dim()));
    let moving: Vec<&(f64, Operator)> = supported.iter().filter(|(w, _)| *w != 0.0).collect();
    let wmax = moving.iter().map(|(w, _)| w.abs()).fold(0.0, f64::max);
    let two_eigenspace = match moving.as_slice() {
        [_] => true,
        [a, b] => (a.0 + b.0).abs() <= 1e-9 * wmax,
        _ => false,
    };

    let base = SaturationReport {
        two_eigenspace,
        krylov_dim,
        equality_gap: report.tau - report.tau_oref,
        degenerate: moving.is_empty(),
        commuting,
        frequency: 0.0,
        theta: vec![0.0; path.len()],
        structure_residual: None,
        orthogonality: None,
        norm_mismatch: None,
    };
    if moving.is_empty() || !two_eigenspace {
        return Ok(base);
    }

    // P_w is the positive-frequency member of a pair, or the lone component
    let (omega, p_w, p_mw) = match moving.as_slice() {
        [a] => (a.0, a.1.clone(), Operator::zeros(h0.dim())),
        [a, b] => {
            let (pos, neg) = if a.0 > 0.0 { (a, b) } else { (b, a) };
            (pos.0, pos.1.clone(), neg.1.clone())
        }
        _ => unreachable!(),
    };
    let x = &p_w + &p_mw;
    let y = &p_w.scale(I) - &p_mw.scale(I);

    let pw_sq = p_w.hs_norm().powi(2);
    let rates: Vec<f64> = gens
        .iter()
        .map(|g| Ok(hs_inner(&p_w, &liouvillian(g).apply(&p_w)?)?.re / pw_sq))
        .collect::<Result<_>>()?;
    let times = path.times();
    let mut theta = vec![0.0; path.len()];
    for k in 1..path.len() {
        theta[k] = theta[k - 1] + linalg::trapezoid(&times[k - 1..=k], &rates[k - 1..=k]);
    }

    let mut residual = 0.0_f64;
    for (s, th) in path.states().iter().zip(&theta) {
        let model = &(&p0 + &x.scale_real(th.cos())) + &y.scale_real(th.sin());
        let r = metric.seminorm(&(&metric.project(s)? - &model))?;
        residual = residual.max(r / norm);
    }
    let n2 = norm * norm;
    let orth = [
        metric.inner(&p0, &x)?.re.abs() / n2,
        metric.inner(&p0, &y)?.re.abs() / n2,
        metric.inner(&p_w, &p_mw)?.re.abs() / n2,
    ];
    let mismatch = (metric.seminorm(&x)? - metric.seminorm(&y)?).abs() / norm;
    Ok(SaturationReport {
        frequency: omega,
        theta,
        structure_residual: Some(residual),
        orthogonality: Some(orth),
        norm_mismatch: Some(mismatch),
        ..base
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::opspace::MetricP;
    use std::sync::Arc;

    fn grid(tau: f64, n: usize) -> Vec<f64> {
        (0..=n).map(|k| tau * k as f64 / n as f64).collect()
    }

    #[test]
    fn qubit_with_commuting_hamiltonian_saturates() {
        let m = Arc::new(MetricP::hilbert_schmidt(2));
        let a = &Operator::pauli_x().scale_real(0.7) + &Operator::pauli_z().scale_real(0.4);
        let p = FlowPath::constant(m, &Operator::pauli_z(), &a, grid(1.1, 50)).unwrap();
        let s = saturation_check(&p).unwrap();
        assert!(s.two_eigenspace && s.commuting && !s.degenerate);
        assert_eq!(s.krylov_dim, 3);
        assert!(s.equality_gap.abs() < 1e-8);
        assert!(s.structure_residual.unwrap() < 1e-12);
        assert!(s.orthogonality.unwrap().iter().all(|&o| o < 1e-12));
        assert!(s.norm_mismatch.unwrap() < 1e-12);
        assert!((s.frequency - 2.0).abs() < 1e-12);
    }

    #[test]
    fn three_gaps_do_not_saturate() {
        let m = Arc::new(MetricP::hilbert_schmidt(3));
        let h = Operator::from_diagonal(&[0.0, 1.0, 3.0]);
        let mut a = Operator::zeros(3);
        for (i, j) in [(0, 1), (1, 2), (0, 2)] {
            a = &(&a + &Operator::ket_bra(3, i, j)) + &Operator::ket_bra(3, j, i);
        }
        let p = FlowPath::constant(m, &h, &a, grid(0.8, 80)).unwrap();
        let s = saturation_check(&p).unwrap();
        assert!(!s.two_eigenspace);
        assert!(s.equality_gap > 1e-6);
    }

    #[test]
    fn stationary_operator_is_degenerate() {
        let m = Arc::new(MetricP::hilbert_schmidt(2));
        let p = FlowPath::constant(m, &Operator::pauli_z(), &Operator::pauli_z(), grid(1.0, 5)).unwrap();
        let s = saturation_check(&p).unwrap();
        assert!(s.degenerate);
        assert!(s.theta.iter().all(|&t| t == 0.0));
    }
}
