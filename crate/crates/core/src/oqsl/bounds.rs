use crate::error::{Error, Result};
use crate::linalg;
use crate::opspace::{liouvillian, MetricP, Operator};
use crate::Complex64;

/// Largest excess of `|Re C(tau)| / C(0)` over one that is attributed to
/// rounding and clamped away.
pub const RATIO_EXCESS_TOL: f64 = 1e-9;

/// Angle `arccos(Re c_tau / c0)`, with the ratio checked against
/// [`RATIO_EXCESS_TOL`] before clamping. The deficit `1 - ratio` is formed
/// directly so small angles keep their relative precision.
pub fn autocorr_angle(c0: f64, c_tau: Complex64) -> Result<f64> {
    if !(c0 > 0.0) {
        return Err(Error::ZeroOperator);
    }
    let ratio = c_tau.re / c0;
    if !ratio.is_finite() || ratio.abs() > 1.0 + RATIO_EXCESS_TOL {
        return Err(Error::RatioOutOfRange(ratio));
    }
    Ok(linalg::angle_from_deficit((c0 - c_tau.re) / c0))
}

/// `tau_QSL = sqrt(C(0)) arccos(Re C(tau) / C(0)) / V`.
///
/// A non-positive velocity means the operator does not move; the bound is
/// then zero and callers are expected to flag the path as stationary.
pub fn tau_qsl(c0: f64, c_tau: Complex64, v: f64) -> Result<f64> {
    if v.is_nan() {
        return Err(Error::InvalidArgument("velocity is NaN".into()));
    }
    let angle = autocorr_angle(c0, c_tau)?;
    if v <= 0.0 {
        return Ok(0.0);
    }
    Ok(c0.sqrt() * angle / v)
}

/// Refined bound with a stationary component of norm `s_norm`:
/// `sqrt(C(0) - |S|^2) arccos((Re C(tau) - |S|^2) / (C(0) - |S|^2)) / V`.
///
/// `Re` acts on `C(tau)` alone; `C(0)` and `|S|^2` are real, so this agrees
/// with applying it to the whole ratio. The excess check is measured in
/// units of `C(0)`, consistent with [`tau_qsl`].
pub fn tau_refined(c0: f64, c_tau: Complex64, s_norm: f64, v: f64) -> Result<f64> {
    if !(c0 > 0.0) {
        return Err(Error::ZeroOperator);
    }
    if v.is_nan() || s_norm.is_nan() || s_norm < 0.0 {
        return Err(Error::InvalidArgument(format!("bad inputs: s_norm {s_norm}, v {v}")));
    }
    let s2 = s_norm * s_norm;
    let rest = c0 - s2;
    if rest <= 0.0 {
        return Err(Error::FullyStationary(rest));
    }
    let num = c_tau.re - s2;
    if num.abs() - rest > RATIO_EXCESS_TOL * c0 {
        return Err(Error::RatioOutOfRange(num / rest));
    }
    if v <= 0.0 {
        return Ok(0.0);
    }
    let angle = linalg::angle_from_deficit((c0 - c_tau.re) / rest);
    Ok(rest.sqrt() * angle / v)
}

/// Common eigenbasis of the Liouvillian of `h` and the metric: eigenvalue
/// pairs `(omega, p)` and the coefficients of `vec(a)` in that basis.
struct JointSpectrum {
    omega: Vec<f64>,
    p: Vec<f64>,
    coeff: Vec<Complex64>,
}

const COMMUTE_TOL: f64 = 1e-10;

fn joint_spectrum(metric: &MetricP, h: &Operator, a: &Operator) -> Result<JointSpectrum> {
    let l = liouvillian(h);
    let residual = metric.commutator_residual(&l)?;
    if residual > COMMUTE_TOL {
        return Err(Error::NonCommuting(residual));
    }
    let ld = l.to_dense()?;
    let pd = metric.p().to_dense()?;
    let eig = linalg::eigh(&ld);
    let radius = eig.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let va = a.to_vec_row_major();
    let mut out = JointSpectrum {
        omega: Vec::new(),
        p: Vec::new(),
        coeff: Vec::new(),
    };
    for r in linalg::cluster_sorted(&eig.values, 1e-9 * radius.max(f64::MIN_POSITIVE)) {
        let v = eig.vectors.columns(r.start, r.len());
        let omega = eig.values[r.clone()].iter().sum::<f64>() / r.len() as f64;
        // P restricted to the eigenspace of L is Hermitian; diagonalize it there
        let block = v.adjoint() * &pd * v;
        let inner = linalg::eigh(&block);
        let basis = v * &inner.vectors;
        let c = basis.adjoint() * &va;
        for k in 0..r.len() {
            out.omega.push(omega);
            out.p.push(inner.values[k]);
            out.coeff.push(c[k]);
        }
    }
    Ok(out)
}

/// Closed-form bound for a constant Hamiltonian whose Liouvillian commutes
/// with the metric:
/// `arccos(Re sum_a v_a exp(i w_a tau)) / sqrt(sum_a v_a w_a^2)` with
/// `v_a = p_a |A_a|^2 / C(0)` in the common eigenbasis.
pub fn tau_qsl_spectral(metric: &MetricP, h: &Operator, a: &Operator, tau: f64) -> Result<f64> {
    h.require_hermitian()?;
    let js = joint_spectrum(metric, h, a)?;
    let weights: Vec<f64> = js.p.iter().zip(&js.coeff).map(|(p, c)| p.max(0.0) * c.norm_sqr()).collect();
    let c0: f64 = weights.iter().sum();
    if c0 <= metric.kernel_tol() * a.hs_norm().powi(2) || c0 == 0.0 {
        return Err(Error::ZeroOperator);
    }
    // 1 - Re sum v e^{i w tau} = sum v (1 - cos(w tau)) = sum 2 v sin^2(w tau / 2)
    let deficit: f64 = weights
        .iter()
        .zip(&js.omega)
        .map(|(w, om)| 2.0 * w * (0.5 * om * tau).sin().powi(2))
        .sum::<f64>()
        / c0;
    let ratio = 1.0 - deficit;
    if ratio < -1.0 - RATIO_EXCESS_TOL {
        return Err(Error::RatioOutOfRange(ratio));
    }
    let speed_sq: f64 = weights.iter().zip(&js.omega).map(|(w, om)| w * om * om).sum::<f64>() / c0;
    if speed_sq <= 0.0 {
        return Ok(0.0);
    }
    Ok(linalg::angle_from_deficit(deficit) / speed_sq.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn trivial_angles() {
        assert_eq!(tau_qsl(2.0, c(2.0), 1.0).unwrap(), 0.0);
        assert!((tau_qsl(4.0, c(-4.0), 0.5).unwrap() - PI * 2.0 / 0.5).abs() < 1e-14);
        assert_eq!(tau_qsl(1.0, c(0.3), 0.0).unwrap(), 0.0);
    }

    #[test]
    fn clamp_tolerance() {
        assert!(tau_qsl(1.0, c(1.0 + 5e-10), 1.0).is_ok());
        assert!(matches!(tau_qsl(1.0, c(1.0 + 1e-8), 1.0), Err(Error::RatioOutOfRange(_))));
        assert!(matches!(tau_qsl(1.0, c(-1.0 - 1e-8), 1.0), Err(Error::RatioOutOfRange(_))));
    }

    #[test]
    fn refined_reduces_and_grows() {
        let (c0, ct, v) = (2.0, c(0.7), 1.3);
        assert_eq!(tau_refined(c0, ct, 0.0, v).unwrap(), tau_qsl(c0, ct, v).unwrap());
        let mut prev = 0.0;
        for k in 0..20 {
            let s = 0.03 * k as f64;
            let t = tau_refined(c0, ct, s, v).unwrap();
            assert!(t >= prev);
            prev = t;
        }
        assert!(matches!(tau_refined(1.0, c(1.0), 1.0, 1.0), Err(Error::FullyStationary(_))));
    }

    #[test]
    fn spectral_z_x() {
        let m = MetricP::hilbert_schmidt(2);
        for &tau in &[0.0, 0.1, 0.7, PI / 2.0] {
            let t = tau_qsl_spectral(&m, &Operator::pauli_z(), &Operator::pauli_x(), tau).unwrap();
            assert!((t - tau).abs() < 1e-13, "{tau} {t}");
        }
    }

    #[test]
    fn spectral_stationary_operator() {
        let m = MetricP::hilbert_schmidt(2);
        let t = tau_qsl_spectral(&m, &Operator::pauli_z(), &Operator::pauli_z(), 1.0).unwrap();
        assert_eq!(t, 0.0);
    }

    #[test]
    fn spectral_rejects_noncommuting_metric() {
        let m = crate::opspace::gibbs_metric(&Operator::pauli_x(), 1.0).unwrap();
        assert!(matches!(
            tau_qsl_spectral(&m, &Operator::pauli_z(), &Operator::pauli_x(), 0.1),
            Err(Error::NonCommuting(_))
        ));
    }
}
