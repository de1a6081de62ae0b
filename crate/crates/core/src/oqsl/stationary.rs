use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, CVector};
use crate::opspace::{liouvillian, MetricP, Operator, SuperOperator};

use super::path::FlowPath;

/// Relative singular-value cutoff for the numerical kernel of `L`.
pub const KERNEL_SV_TOL: f64 = 1e-10;
/// Largest projector difference for which two kernel intersections count as
/// the same subspace.
const SUBSPACE_TOL: f64 = 1e-8;

/// Split `A^ = S + V` with `S` stationary and `Re <S|V_t> = 0`.
#[derive(Debug, Clone)]
pub struct StationaryDecomposition {
    /// Constant part used by the bound.
    pub s: Operator,
    /// Projection of `A^` onto `ker(L) ∩ im(P)`. Equal to `s` unless the
    /// kernel varied along the path.
    pub p0: Operator,
    /// Initial moving part `A^ - s`.
    pub v0: Operator,
    /// False when the kernel intersection changed along the path and `s`
    /// fell back to the identity component.
    pub invariant: bool,
}

/// Orthonormal basis (columns, vectorized) of `ker(L) ∩ im(P)`.
///
/// Both conditions are stacked into one matrix `[L / |L|; Pi_ker(P)]` whose
/// null space is exactly the intersection, whether or not `L` and `P`
/// commute.
pub fn kernel_intersection(metric: &MetricP, l: &SuperOperator) -> Result<CMatrix> {
    if l.dim() != metric.dim() {
        return Err(Error::DimensionMismatch {
            expected: metric.dim(),
            got: l.dim(),
        });
    }
    let ld = l.to_dense()?;
    let kp = metric.kernel_projector().to_dense()?;
    let n = ld.nrows();
    let scale = linalg::fro(&ld);
    let mut stacked = CMatrix::zeros(2 * n, n);
    if scale > 0.0 {
        stacked.rows_mut(0, n).copy_from(&ld.unscale(scale));
    }
    stacked.rows_mut(n, n).copy_from(&kp);
    Ok(linalg::null_space(&stacked, KERNEL_SV_TOL))
}

/// `<.|.>`-orthogonal projection of `a` onto the span of the columns of `w`.
fn project_onto(metric: &MetricP, w: &CMatrix, a: &Operator) -> Result<Operator> {
    let dim = metric.dim();
    if w.ncols() == 0 {
        return Ok(Operator::zeros(dim));
    }
    let pd = metric.p().to_dense()?;
    let pw = &pd * w;
    let gram = w.adjoint() * &pw;
    let rhs: CVector = pw.adjoint() * a.to_vec_row_major();
    let eig = linalg::eigh(&gram);
    let (lo, hi) = (eig.values[0], *eig.values.last().unwrap());
    if !(lo > metric.kernel_tol()) {
        return Err(Error::RankDeficient(if hi > 0.0 { lo / hi } else { 0.0 }));
    }
    let coeff = gram
        .cholesky()
        .ok_or(Error::RankDeficient(lo / hi))?
        .solve(&rhs);
    Operator::from_vec_row_major(&(w * coeff))
}

/// Optimal stationary component for a constant Liouvillian `l`: the
/// projection of `a_hat` onto `ker(L) ∩ im(P)`.
pub fn stationary_component(metric: &MetricP, l: &SuperOperator, a_hat: &Operator) -> Result<StationaryDecomposition> {
    let w = kernel_intersection(metric, l)?;
    let p0 = project_onto(metric, &w, a_hat)?;
    Ok(StationaryDecomposition {
        s: p0.clone(),
        v0: a_hat - &p0,
        p0,
        invariant: true,
    })
}

/// Component of `a_hat` along the projected identity,
/// `(<1|A> / <1|1>) 1^`. The identity is stationary under every
/// Hamiltonian, so this is always an admissible `S`.
pub fn identity_component(metric: &MetricP, a_hat: &Operator) -> Result<Operator> {
    let id = Operator::identity(metric.dim());
    let nn = metric.inner(&id, &id)?.re;
    if nn <= metric.kernel_tol() * metric.dim() as f64 {
        return Ok(Operator::zeros(metric.dim()));
    }
    let c = metric.inner(&id, a_hat)? / nn;
    Ok(metric.project(&id)?.scale(c))
}

fn same_subspace(a: &CMatrix, b: &CMatrix) -> bool {
    if a.ncols() != b.ncols() {
        return false;
    }
    let pa = a * a.adjoint();
    let pb = b * b.adjoint();
    linalg::fro(&(pa - pb)) <= SUBSPACE_TOL
}

/// Stationary decomposition of the initial state of a path.
///
/// When `ker(L_t) ∩ im(P)` is the same at every grid point the optimal
/// projection is used. Otherwise the optimal refinement does not apply and
/// the identity component is returned instead, with `invariant = false`.
pub fn path_stationary(path: &FlowPath) -> Result<StationaryDecomposition> {
    let metric = path.metric();
    let a_hat = metric.project(&path.states()[0])?;
    let gens = path.generators();
    let w0 = kernel_intersection(metric, &liouvillian(&gens[0]))?;
    let mut invariant = true;
    let mut prev = &gens[0];
    for g in &gens[1..] {
        if g.matrix() == prev.matrix() {
            continue;
        }
        prev = g;
        if !same_subspace(&w0, &kernel_intersection(metric, &liouvillian(g))?) {
            invariant = false;
            break;
        }
    }
    if invariant {
        let p0 = project_onto(metric, &w0, &a_hat)?;
        return Ok(StationaryDecomposition {
            s: p0.clone(),
            v0: &a_hat - &p0,
            p0,
            invariant,
        });
    }
    log::warn!("ker(L) ∩ im(P) varies along the path; using the identity component as S");
    let s = identity_component(metric, &a_hat)?;
    Ok(StationaryDecomposition {
        p0: s.clone(),
        v0: &a_hat - &s,
        s,
        invariant,
    })
}

/// Eigenspaces of a Hermitian `l` with the vectorized `a` resolved in each:
/// `(eigenvalue, component)` pairs, ascending.
pub(crate) fn eigen_components(l: &SuperOperator, a: &Operator) -> Result<Vec<(f64, Operator)>> {
    let ld = l.to_dense()?;
    let eig = linalg::eigh(&ld);
    let radius = eig.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let va = a.to_vec_row_major();
    linalg::cluster_sorted(&eig.values, 1e-9 * radius.max(f64::MIN_POSITIVE))
        .into_iter()
        .map(|r| {
            let v = eig.vectors.columns(r.start, r.len());
            let omega = eig.values[r.clone()].iter().sum::<f64>() / r.len() as f64;
            let comp = v * (v.adjoint() * &va);
            Ok((if omega.abs() <= 1e-9 * radius { 0.0 } else { omega }, Operator::from_vec_row_major(&comp)?))
        })
        .collect()
}

/// Number of eigenspaces of `l` on which `a_hat` has support above
/// `tol * |a_hat|`. This is the dimension of the smallest invariant
/// subspace containing the dynamics, i.e. the Krylov dimension.
pub fn krylov_dimension(l: &SuperOperator, a_hat: &Operator, tol: f64) -> Result<usize> {
    let norm = a_hat.hs_norm();
    if norm == 0.0 {
        return Ok(0);
    }
    Ok(eigen_components(l, a_hat)?
        .iter()
        .filter(|(_, c)| c.hs_norm() > tol * norm)
        .count())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Complex64;

    #[test]
    fn identity_is_fully_stationary() {
        let m = MetricP::hilbert_schmidt(2);
        let l = liouvillian(&Operator::pauli_z());
        let d = stationary_component(&m, &l, &Operator::identity(2)).unwrap();
        assert!((&d.p0 - &Operator::identity(2)).hs_norm() < 1e-14);
        assert!(d.v0.hs_norm() < 1e-14);
    }

    #[test]
    fn x_has_no_stationary_part() {
        let m = MetricP::hilbert_schmidt(2);
        let l = liouvillian(&Operator::pauli_z());
        let d = stationary_component(&m, &l, &Operator::pauli_x()).unwrap();
        assert!(d.p0.hs_norm() < 1e-14);
    }

    #[test]
    fn x_plus_z_keeps_z() {
        let m = MetricP::hilbert_schmidt(2);
        let l = liouvillian(&Operator::pauli_z());
        let a = &Operator::pauli_x() + &Operator::pauli_z();
        let d = stationary_component(&m, &l, &a).unwrap();
        assert!((&d.p0 - &Operator::pauli_z()).hs_norm() < 1e-14);
        assert!((&d.v0 - &Operator::pauli_x()).hs_norm() < 1e-14);
    }

    #[test]
    fn identity_component_hs() {
        let m = MetricP::hilbert_schmidt(3);
        let a = Operator::from_diagonal(&[1.0, 2.0, 6.0]);
        let s = identity_component(&m, &a).unwrap();
        assert!((&s - &Operator::identity(3).scale_real(3.0)).hs_norm() < 1e-14);
    }

    #[test]
    fn intersection_respects_singular_metric() {
        // rho = |0><0| on both sides leaves only span{|0><0|} in im(P)
        let rho = Operator::ket_bra(2, 0, 0);
        let m = crate::opspace::metric_from_rho(&rho, &rho).unwrap();
        let w = kernel_intersection(&m, &liouvillian(&Operator::pauli_z())).unwrap();
        assert_eq!(w.ncols(), 1);
        assert!((w[(0, 0)].norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn krylov_dimension_examples() {
        let l = liouvillian(&Operator::pauli_z());
        assert_eq!(krylov_dimension(&l, &Operator::pauli_x(), 1e-10).unwrap(), 2);
        let xz = &Operator::pauli_x() + &Operator::pauli_z();
        assert_eq!(krylov_dimension(&l, &xz, 1e-10).unwrap(), 3);
        assert_eq!(krylov_dimension(&l, &Operator::pauli_z(), 1e-10).unwrap(), 1);
        let raise = Operator::ket_bra(2, 0, 1).scale(Complex64::new(0.0, 1.0));
        assert_eq!(krylov_dimension(&l, &raise, 1e-10).unwrap(), 1);
    }

    #[test]
    fn time_dependent_kernel_falls_back() {
        use std::sync::Arc;
        let m = Arc::new(MetricP::hilbert_schmidt(2));
        let a = &Operator::pauli_x() + &Operator::pauli_z();
        let times: Vec<f64> = (0..=10).map(|k| 0.05 * k as f64).collect();
        let path = FlowPath::from_schedule(m, &a, times, 4, |t| {
            &Operator::pauli_z() + &Operator::pauli_x().scale_real(t)
        })
        .unwrap();
        let d = path_stationary(&path).unwrap();
        assert!(!d.invariant);
        assert!(d.s.hs_norm() < 1e-14);
    }
}
