use num_complex::Complex64;

use super::operator::{check_same_dim, hs_inner, Operator};
use super::superop::SuperOperator;
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, CVector};

/// Relative tolerance for accepting slightly negative eigenvalues.
pub const PSD_TOL: f64 = 1e-10;
/// Eigenvalues below this fraction of the largest count as zero.
pub const KERNEL_REL_TOL: f64 = 1e-12;
/// Relative tolerance for the self-adjointness check.
const SELF_ADJOINT_TOL: f64 = 1e-10;
/// Relative width used to group equal eigenvalues into one eigenprojector.
const CLUSTER_REL_TOL: f64 = 1e-9;

/// One term `p_k Pi_k` of the spectral resolution of a metric.
#[derive(Debug, Clone)]
pub struct SpectralComponent {
    pub eigenvalue: f64,
    pub projector: SuperOperator,
}

/// Positive semi-definite superoperator `P` defining `<A|B> = <A, P B>_HS`,
/// together with its spectral resolution.
#[derive(Debug, Clone)]
pub struct MetricP {
    p: SuperOperator,
    spectrum: Vec<SpectralComponent>,
    kernel_projector: SuperOperator,
    kernel_tol: f64,
    /// Orthonormal basis of im(P), as columns in vectorized operator space.
    image_basis: CMatrix,
}

/// Projection of an operator onto the effective Hilbert space im(P).
#[derive(Debug, Clone)]
pub struct EffectiveElement {
    pub projection: Operator,
    pub source: Operator,
}

impl MetricP {
    /// Validates `p` and computes its spectral resolution.
    pub fn new(p: SuperOperator) -> Result<Self> {
        let dim = p.dim();
        let dense = p.to_dense()?;
        let scale = linalg::fro(&dense);
        if scale == 0.0 {
            return Err(Error::ZeroOperator);
        }
        let defect = linalg::hermiticity_defect(&dense);
        if defect > SELF_ADJOINT_TOL * scale {
            return Err(Error::NotHermitian(defect));
        }
        let eig = linalg::eigh(&dense);
        let radius = eig.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let lowest = eig.values[0];
        if lowest < -PSD_TOL * radius {
            return Err(Error::NotPositiveSemiDefinite(lowest));
        }
        let largest = *eig.values.last().unwrap();
        let kernel_tol = KERNEL_REL_TOL * largest;

        let n = dim * dim;
        let first_nonzero = eig.values.iter().position(|&v| v > kernel_tol).unwrap_or(n);
        let projector_of = |cols: std::ops::Range<usize>| -> Result<SuperOperator> {
            let v = eig.vectors.columns(cols.start, cols.len());
            SuperOperator::from_dense(dim, v * v.adjoint())
        };
        let kernel_projector = projector_of(0..first_nonzero)?;
        let mut spectrum = Vec::new();
        for r in linalg::cluster_sorted(&eig.values[first_nonzero..], CLUSTER_REL_TOL * radius) {
            let r = (r.start + first_nonzero)..(r.end + first_nonzero);
            let mean = eig.values[r.clone()].iter().sum::<f64>() / r.len() as f64;
            spectrum.push(SpectralComponent {
                eigenvalue: mean,
                projector: projector_of(r)?,
            });
        }
        let image_basis = eig.vectors.columns(first_nonzero, n - first_nonzero).into_owned();
        Ok(Self {
            p,
            spectrum,
            kernel_projector,
            kernel_tol,
            image_basis,
        })
    }

    /// The Hilbert-Schmidt metric, `P = 1`.
    pub fn hilbert_schmidt(dim: usize) -> Self {
        Self::new(SuperOperator::identity(dim)).expect("identity is a valid metric")
    }

    pub fn dim(&self) -> usize {
        self.p.dim()
    }

    pub fn p(&self) -> &SuperOperator {
        &self.p
    }

    /// Nonzero eigenvalues with their eigenprojectors, ascending.
    pub fn spectrum(&self) -> &[SpectralComponent] {
        &self.spectrum
    }

    pub fn kernel_tol(&self) -> f64 {
        self.kernel_tol
    }

    pub fn kernel_projector(&self) -> &SuperOperator {
        &self.kernel_projector
    }

    /// Orthonormal columns spanning im(P) in vectorized form.
    pub fn image_basis(&self) -> &CMatrix {
        &self.image_basis
    }

    pub fn rank(&self) -> usize {
        self.image_basis.ncols()
    }

    pub fn apply(&self, a: &Operator) -> Result<Operator> {
        self.p.apply(a)
    }

    /// `<a|b> = <a, P b>_HS`.
    pub fn inner(&self, a: &Operator, b: &Operator) -> Result<Complex64> {
        check_same_dim(a, b)?;
        hs_inner(a, &self.p.apply(b)?)
    }

    pub fn seminorm(&self, a: &Operator) -> Result<f64> {
        Ok(self.inner(a, a)?.re.max(0.0).sqrt())
    }

    /// Orthogonal projection of `a` onto im(P).
    pub fn project(&self, a: &Operator) -> Result<Operator> {
        if a.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: a.dim(),
            });
        }
        let v: CVector = a.to_vec_row_major();
        let q = &self.image_basis;
        Operator::from_vec_row_major(&(q * (q.adjoint() * v)))
    }

    /// Relative norm of `[L, P]`; zero when the metric is conserved by the
    /// flow generated by `l`.
    pub fn commutator_residual(&self, l: &SuperOperator) -> Result<f64> {
        let c = l.commutator(&self.p)?;
        let scale = l.dense_norm()? * self.p.dense_norm()?;
        if scale == 0.0 {
            return Ok(0.0);
        }
        Ok(c.dense_norm()? / scale)
    }
}

pub fn p_inner(metric: &MetricP, a: &Operator, b: &Operator) -> Result<Complex64> {
    metric.inner(a, b)
}

pub fn seminorm(metric: &MetricP, a: &Operator) -> Result<f64> {
    metric.seminorm(a)
}

pub fn effective_project(metric: &MetricP, a: &Operator) -> Result<EffectiveElement> {
    Ok(EffectiveElement {
        projection: metric.project(a)?,
        source: a.clone(),
    })
}

fn require_psd(rho: &Operator) -> Result<()> {
    rho.require_hermitian()?;
    let eig = linalg::eigh(rho.matrix());
    let radius = eig.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if eig.values[0] < -PSD_TOL * radius {
        return Err(Error::NotPositiveSemiDefinite(eig.values[0]));
    }
    Ok(())
}

/// Metric `A -> rho1 A rho2`, i.e. `<A|B> = Tr(A^dagger rho1 B rho2)`.
pub fn metric_from_rho(rho1: &Operator, rho2: &Operator) -> Result<MetricP> {
    check_same_dim(rho1, rho2)?;
    require_psd(rho1)?;
    require_psd(rho2)?;
    let p = SuperOperator::from_factors(rho1.dim(), vec![(rho1.matrix().clone(), rho2.matrix().clone())])?;
    MetricP::new(p)
}

fn check_beta(beta: f64, strictly_positive: bool) -> Result<()> {
    let ok = beta.is_finite() && if strictly_positive { beta > 0.0 } else { beta >= 0.0 };
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("inverse temperature {beta} out of range")))
    }
}

/// Energies, eigenvectors and Boltzmann weights `e^{-beta E}/Z`.
/// Energies are shifted by their minimum before exponentiating.
fn thermal_weights(h: &Operator, beta: f64) -> Result<(Vec<f64>, CMatrix, Vec<f64>)> {
    h.require_hermitian()?;
    let eig = linalg::eigh(h.matrix());
    let e0 = eig.values[0];
    let w: Vec<f64> = eig.values.iter().map(|e| (-beta * (e - e0)).exp()).collect();
    let z: f64 = w.iter().sum();
    let w = w.into_iter().map(|x| x / z).collect();
    Ok((eig.values, eig.vectors, w))
}

/// Gibbs state `e^{-beta H}/Z`.
pub fn gibbs_state(h: &Operator, beta: f64) -> Result<Operator> {
    check_beta(beta, false)?;
    let (_, v, w) = thermal_weights(h, beta)?;
    let d = h.dim();
    let mut m = CMatrix::zeros(d, d);
    for (k, wk) in w.iter().enumerate() {
        let col = v.column(k);
        m += (col * col.adjoint()).scale(*wk);
    }
    Operator::new(m)
}

/// `A -> A e^{-beta H}/Z`.
pub fn gibbs_metric(h: &Operator, beta: f64) -> Result<MetricP> {
    let rho = gibbs_state(h, beta)?;
    metric_from_rho(&Operator::identity(h.dim()), &rho)
}

/// Kubo (canonical correlation) metric with its thermal centering map.
#[derive(Debug, Clone)]
pub struct KuboMetric {
    metric: MetricP,
    thermal_state: Operator,
}

impl KuboMetric {
    pub fn metric(&self) -> &MetricP {
        &self.metric
    }

    pub fn into_metric(self) -> MetricP {
        self.metric
    }

    pub fn thermal_state(&self) -> &Operator {
        &self.thermal_state
    }

    /// `C(A) = A - <A>_beta 1` with `<A>_beta = Tr(rho_beta A)`.
    ///
    /// This is the subtraction that turns the plain canonical correlation into
    /// the connected Kubo product, and it annihilates the identity.
    pub fn center(&self, a: &Operator) -> Result<Operator> {
        check_same_dim(a, &self.thermal_state)?;
        let mean = (self.thermal_state.matrix() * a.matrix()).trace();
        Ok(a - &Operator::identity(a.dim()).scale(mean))
    }
}

/// Eigenvalue of the Kubo metric on `|E_n><E_m|`:
/// `(1/beta) int_0^beta e^{-(beta - lambda) E_m} e^{-lambda E_n} dlambda / Z`,
/// given the normalized weights `w_n = e^{-beta E_n}/Z`.
pub fn kubo_weight(e_n: f64, e_m: f64, w_n: f64, w_m: f64, beta: f64) -> f64 {
    let x = beta * (e_m - e_n);
    if x.abs() < 1e-8 {
        // analytic limit, second order in x
        w_m * (1.0 + 0.5 * x)
    } else if x.abs() < 1.0 {
        w_m * x.exp_m1() / x
    } else {
        (w_n - w_m) / x
    }
}

/// Kubo metric `P~ = A o B` with eigenvalues `kubo_weight(E_n, E_m)` on
/// `|E_n><E_m|`. Operators must be centered with [`KuboMetric::center`]
/// before use.
pub fn kubo_metric(h: &Operator, beta: f64) -> Result<KuboMetric> {
    check_beta(beta, true)?;
    let (e, v, w) = thermal_weights(h, beta)?;
    let d = h.dim();
    let proj: Vec<CMatrix> = (0..d)
        .map(|k| {
            let col = v.column(k);
            col * col.adjoint()
        })
        .collect();
    let mut pairs = Vec::with_capacity(d * d);
    for n in 0..d {
        for m in 0..d {
            let k = kubo_weight(e[n], e[m], w[n], w[m], beta);
            pairs.push((proj[n].scale(k), proj[m].clone()));
        }
    }
    let metric = MetricP::new(SuperOperator::from_factors(d, pairs)?)?;
    let mut rho = CMatrix::zeros(d, d);
    for (k, wk) in w.iter().enumerate() {
        rho += proj[k].scale(*wk);
    }
    Ok(KuboMetric {
        metric,
        thermal_state: Operator::new(rho)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::opspace::liouvillian;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn hs_metric_from_identities() {
        let m = metric_from_rho(&Operator::identity(2), &Operator::identity(2)).unwrap();
        let d = m.p().to_dense().unwrap();
        assert!(linalg::fro(&(d - CMatrix::identity(4, 4))) < 1e-15);
        assert!((m.seminorm(&Operator::pauli_x()).unwrap() - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn beta_zero_gibbs_is_half_identity() {
        let m = gibbs_metric(&Operator::pauli_z(), 0.0).unwrap();
        let d = m.p().to_dense().unwrap();
        assert!(linalg::fro(&(d - CMatrix::identity(4, 4).scale(0.5))) < 1e-15);
        assert_eq!(m.spectrum().len(), 1);
        assert!((m.spectrum()[0].eigenvalue - 0.5).abs() < 1e-15);
    }

    #[test]
    fn projector_metric_has_kernel() {
        let rho2 = Operator::ket_bra(2, 0, 0);
        let m = metric_from_rho(&Operator::identity(2), &rho2).unwrap();
        let a = Operator::ket_bra(2, 0, 1);
        assert_eq!(m.seminorm(&a).unwrap(), 0.0);
        let b = &Operator::ket_bra(2, 0, 1) + &Operator::ket_bra(2, 1, 0);
        let e = effective_project(&m, &b).unwrap();
        assert!((&e.projection - &Operator::ket_bra(2, 1, 0)).hs_norm() < 1e-14);
        assert_eq!(m.rank(), 2);
    }

    #[test]
    fn gibbs_eigenvalue_on_transition() {
        let (e, beta) = (1.3_f64, 0.7_f64);
        let h = Operator::from_diagonal(&[0.0, e]);
        let m = gibbs_metric(&h, beta).unwrap();
        let z = 1.0 + (-beta * e).exp();
        let a = Operator::ket_bra(2, 0, 1);
        let pa = m.apply(&a).unwrap();
        assert!((pa.get(0, 1) - c((-beta * e).exp() / z, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn kubo_transition_weight() {
        let (e, beta) = (0.8_f64, 1.7_f64);
        let h = Operator::from_diagonal(&[0.0, e]);
        let k = kubo_metric(&h, beta).unwrap();
        let z = 1.0 + (-beta * e).exp();
        let pa = k.metric().apply(&Operator::ket_bra(2, 0, 1)).unwrap();
        let want = (1.0 - (-beta * e).exp()) / (beta * z * e);
        assert!((pa.get(0, 1).re - want).abs() < 1e-14);
        let pa = k.metric().apply(&Operator::ket_bra(2, 0, 0)).unwrap();
        assert!((pa.get(0, 0).re - 1.0 / z).abs() < 1e-14);
    }

    #[test]
    fn kubo_weight_branches_are_continuous() {
        let (wn, beta) = (0.4_f64, 2.0_f64);
        for &gap in &[1e-10, 1e-9, 4e-9, 6e-9, 1e-7, 0.49, 0.51, 3.0] {
            let wm = wn * (-beta * gap).exp();
            let got = kubo_weight(0.0, gap, wn, wm, beta);
            // direct midpoint quadrature of the defining integral
            let steps = 50_000;
            let mut q = 0.0;
            for s in 0..steps {
                let lam = (s as f64 + 0.5) / steps as f64 * beta;
                q += (-(beta - lam) * gap).exp();
            }
            let want = wn * q / steps as f64;
            assert!((got - want).abs() < 1e-8 * want, "gap {gap}: {got} vs {want}");
        }
    }

    #[test]
    fn centering_kills_identity() {
        let h = Operator::from_diagonal(&[0.1, -0.4, 1.0]);
        let k = kubo_metric(&h, 1.0).unwrap();
        assert!(k.center(&Operator::identity(3)).unwrap().hs_norm() < 1e-15);
    }

    #[test]
    fn gibbs_and_kubo_commute_with_liouvillian() {
        let h = Operator::from_rows(
            3,
            &[
                c(0.3, 0.0),
                c(0.1, 0.2),
                c(-0.5, 0.0),
                c(0.1, -0.2),
                c(-1.0, 0.0),
                c(0.0, 0.4),
                c(-0.5, 0.0),
                c(0.0, -0.4),
                c(0.7, 0.0),
            ],
        )
        .unwrap();
        let l = liouvillian(&h);
        assert!(gibbs_metric(&h, 0.9).unwrap().commutator_residual(&l).unwrap() < 1e-12);
        assert!(kubo_metric(&h, 0.9).unwrap().metric().commutator_residual(&l).unwrap() < 1e-12);
    }

    #[test]
    fn rejects_bad_inputs() {
        let not_psd = Operator::from_diagonal(&[1.0, -0.5]);
        assert!(matches!(
            metric_from_rho(&Operator::identity(2), &not_psd),
            Err(Error::NotPositiveSemiDefinite(_))
        ));
        assert!(matches!(
            gibbs_metric(&Operator::ket_bra(2, 0, 1), 1.0),
            Err(Error::NotHermitian(_))
        ));
        assert!(kubo_metric(&Operator::pauli_z(), 0.0).is_err());
        assert!(matches!(
            metric_from_rho(&Operator::identity(2), &Operator::identity(3)),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}
