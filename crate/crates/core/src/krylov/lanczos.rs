use nalgebra::DMatrix;

use super::chain::KrylovChain;
use crate::error::{Error, Result};
use crate::opspace::{hs_inner, Operator};
use crate::Complex64;

/// Default termination factor: stop once `b_{n+1} < LANCZOS_REL_TOL * b_1`.
pub const LANCZOS_REL_TOL: f64 = 1e-8;

/// Orthonormal Krylov basis of `O_0` under `L = [H, .]`.
#[derive(Debug, Clone)]
pub struct KrylovBasis {
    pub d: usize,
    pub basis: Vec<Operator>,
    /// Diagonal coefficients `a_n = <O_n|L O_n>`; zero for Hermitian `O_0`.
    pub lanczos_a: Vec<f64>,
    /// `b_1 .. b_{D-1}`.
    pub lanczos_b: Vec<f64>,
}

impl KrylovBasis {
    pub fn chain(&self) -> Result<KrylovChain> {
        KrylovChain::new(self.lanczos_b.clone())
    }

    /// `max_ij |<O_i|O_j> - delta_ij|`.
    pub fn orthonormality_residual(&self) -> Result<f64> {
        let mut worst = 0.0_f64;
        for (i, a) in self.basis.iter().enumerate() {
            for (j, b) in self.basis.iter().enumerate() {
                let want = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((hs_inner(a, b)? - Complex64::new(want, 0.0)).norm());
            }
        }
        Ok(worst)
    }

    /// Matrix elements `<O_i|L O_j>`.
    pub fn liouvillian_matrix(&self, h: &Operator) -> Result<DMatrix<Complex64>> {
        let images: Vec<Operator> = self.basis.iter().map(|o| h.commutator(o)).collect::<Result<_>>()?;
        let mut m = DMatrix::zeros(self.d, self.d);
        for i in 0..self.d {
            for j in 0..self.d {
                m[(i, j)] = hs_inner(&self.basis[i], &images[j])?;
            }
        }
        Ok(m)
    }

    /// Largest deviation of `<O_i|L O_j>` from the tridiagonal matrix with
    /// diagonal `a_n` and off-diagonals `b_n`.
    pub fn tridiagonality_residual(&self, h: &Operator) -> Result<f64> {
        let m = self.liouvillian_matrix(h)?;
        let mut worst = 0.0_f64;
        for i in 0..self.d {
            for j in 0..self.d {
                let want = if i == j {
                    self.lanczos_a[i]
                } else if i + 1 == j {
                    self.lanczos_b[i]
                } else if j + 1 == i {
                    self.lanczos_b[j]
                } else {
                    0.0
                };
                worst = worst.max((m[(i, j)] - Complex64::new(want, 0.0)).norm());
            }
        }
        Ok(worst)
    }
}

fn subtract_projections(w: &mut Operator, basis: &[Operator]) -> Result<()> {
    for q in basis {
        let c = hs_inner(q, w)?;
        *w = &*w - &q.scale(c);
    }
    Ok(())
}

/// Lanczos recursion `A_{n+1} = L O_n - a_n O_n - b_n O_{n-1}` with full
/// re-orthogonalization against every earlier basis element.
///
/// `o0` is normalized internally. The recursion stops when the next `b`
/// falls below `rel_tol * b_1` (for `b_1` itself, below `rel_tol * |H|`).
pub fn lanczos(h: &Operator, o0: &Operator, rel_tol: Option<f64>) -> Result<KrylovBasis> {
    h.require_hermitian()?;
    if h.dim() != o0.dim() {
        return Err(Error::DimensionMismatch {
            expected: h.dim(),
            got: o0.dim(),
        });
    }
    let n0 = o0.hs_norm();
    if n0 == 0.0 {
        return Err(Error::ZeroOperator);
    }
    let rel_tol = rel_tol.unwrap_or(LANCZOS_REL_TOL);
    let max_d = h.dim() * h.dim();
    let mut basis = vec![o0.scale_real(1.0 / n0)];
    let mut a_coeffs = Vec::new();
    let mut b_coeffs: Vec<f64> = Vec::new();
    let mut cutoff = rel_tol * h.hs_norm();

    loop {
        let n = basis.len() - 1;
        let on = &basis[n];
        let lo = h.commutator(on)?;
        let a = hs_inner(on, &lo)?.re;
        a_coeffs.push(a);
        if basis.len() == max_d {
            break;
        }
        let mut w = &lo - &on.scale_real(a);
        if n > 0 {
            w = &w - &basis[n - 1].scale_real(b_coeffs[n - 1]);
        }
        subtract_projections(&mut w, &basis)?;
        subtract_projections(&mut w, &basis)?;
        let b = w.hs_norm();
        if !(b > cutoff) {
            break;
        }
        if b_coeffs.is_empty() {
            cutoff = rel_tol * b;
        }
        b_coeffs.push(b);
        basis.push(w.scale_real(1.0 / b));
    }
    Ok(KrylovBasis {
        d: basis.len(),
        basis,
        lanczos_a: a_coeffs,
        lanczos_b: b_coeffs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pauli_chain() {
        let o0 = Operator::pauli_x().scale_real(0.5f64.sqrt());
        let k = lanczos(&Operator::pauli_z(), &o0, None).unwrap();
        assert_eq!(k.d, 2);
        assert!((k.lanczos_b[0] - 2.0).abs() < 1e-14);
        // L X = 2iY, so O_1 is along iY
        let iy = Operator::pauli_y().scale(Complex64::new(0.0, 0.5f64.sqrt()));
        assert!((hs_inner(&iy, &k.basis[1]).unwrap().norm() - 1.0).abs() < 1e-14);
        assert!(k.orthonormality_residual().unwrap() < 1e-14);
        assert!(k.tridiagonality_residual(&Operator::pauli_z()).unwrap() < 1e-14);
    }

    #[test]
    fn commuting_start_is_one_dimensional() {
        let k = lanczos(&Operator::pauli_z(), &Operator::pauli_z(), None).unwrap();
        assert_eq!(k.d, 1);
        assert!(k.lanczos_b.is_empty());
    }

    #[test]
    fn zero_start_is_rejected() {
        assert!(matches!(
            lanczos(&Operator::pauli_z(), &Operator::zeros(2), None),
            Err(Error::ZeroOperator)
        ));
    }
}
