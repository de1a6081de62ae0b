use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, CVector, I, ONE, ZERO};

/// A dense complex square matrix acting on a `dim`-dimensional Hilbert space.
///
/// Hermiticity is a checkable property ([`Operator::is_hermitian`]), never an
/// assumption of the type.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    m: CMatrix,
}

impl Operator {
    pub fn new(m: CMatrix) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::NotSquare {
                rows: m.nrows(),
                cols: m.ncols(),
            });
        }
        if m.nrows() == 0 {
            return Err(Error::InvalidArgument("operator dimension must be positive".into()));
        }
        Ok(Self { m })
    }

    /// Builds an operator from row-major entries.
    pub fn from_rows(dim: usize, entries: &[Complex64]) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                got: entries.len(),
            });
        }
        Self::new(CMatrix::from_row_slice(dim, dim, entries))
    }

    pub fn from_real(m: &DMatrix<f64>) -> Result<Self> {
        Self::new(linalg::to_complex(m))
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let d = diag.len().max(1);
        let mut m = CMatrix::zeros(d, d);
        for (k, &x) in diag.iter().enumerate() {
            m[(k, k)] = Complex64::new(x, 0.0);
        }
        Self { m }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            m: CMatrix::identity(dim, dim),
        }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            m: CMatrix::zeros(dim, dim),
        }
    }

    /// `|i><j|` in dimension `dim`.
    pub fn ket_bra(dim: usize, i: usize, j: usize) -> Self {
        let mut m = CMatrix::zeros(dim, dim);
        m[(i, j)] = ONE;
        Self { m }
    }

    pub fn pauli_x() -> Self {
        Self {
            m: CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]),
        }
    }

    pub fn pauli_y() -> Self {
        Self {
            m: CMatrix::from_row_slice(2, 2, &[ZERO, -I, I, ZERO]),
        }
    }

    pub fn pauli_z() -> Self {
        Self {
            m: CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE]),
        }
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.m
    }

    pub fn into_matrix(self) -> CMatrix {
        self.m
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.m[(i, j)]
    }

    pub fn adjoint(&self) -> Self {
        Self { m: self.m.adjoint() }
    }

    pub fn trace(&self) -> Complex64 {
        self.m.trace()
    }

    /// Hilbert-Schmidt norm `sqrt(Tr(A^dagger A))`.
    pub fn hs_norm(&self) -> f64 {
        linalg::fro(&self.m)
    }

    pub fn hermiticity_defect(&self) -> f64 {
        linalg::hermiticity_defect(&self.m)
    }

    /// Hermitian to `tol` relative to the operator's own norm.
    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_defect() <= tol * self.hs_norm().max(1.0)
    }

    pub fn require_hermitian(&self) -> Result<()> {
        if self.is_hermitian(1e-10) {
            Ok(())
        } else {
            Err(Error::NotHermitian(self.hermiticity_defect()))
        }
    }

    /// `(A + A^dagger) / 2`.
    pub fn hermitian_part(&self) -> Self {
        Self {
            m: (&self.m + self.m.adjoint()).scale(0.5),
        }
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self { m: &self.m * s }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        Self { m: self.m.scale(s) }
    }

    /// `[self, other] = self other - other self`.
    pub fn commutator(&self, other: &Operator) -> Result<Operator> {
        check_same_dim(self, other)?;
        Ok(Self {
            m: &self.m * &other.m - &other.m * &self.m,
        })
    }

    /// Diagonal part in the computational basis.
    pub fn diagonal_part(&self) -> Operator {
        let d = self.dim();
        let mut m = CMatrix::zeros(d, d);
        for k in 0..d {
            m[(k, k)] = self.m[(k, k)];
        }
        Self { m }
    }

    pub fn off_diagonal_part(&self) -> Operator {
        Self {
            m: &self.m - self.diagonal_part().m,
        }
    }

    /// Sum of `|A_nm|^2` over `n != m`.
    pub fn off_diagonal_sq(&self) -> f64 {
        let d = self.dim();
        let mut s = 0.0;
        for i in 0..d {
            for j in 0..d {
                if i != j {
                    s += self.m[(i, j)].norm_sqr();
                }
            }
        }
        s
    }

    /// Conjugation `U A U^dagger`.
    pub fn conjugate_by(&self, u: &CMatrix) -> Operator {
        Self {
            m: u * &self.m * u.adjoint(),
        }
    }

    /// Row-major stacking `A_nm -> v[n * dim + m]`.
    pub fn to_vec_row_major(&self) -> CVector {
        let d = self.dim();
        CVector::from_iterator(d * d, (0..d * d).map(|k| self.m[(k / d, k % d)]))
    }

    pub fn from_vec_row_major(v: &CVector) -> Result<Self> {
        let n = v.len();
        let d = (n as f64).sqrt().round() as usize;
        if d * d != n {
            return Err(Error::InvalidArgument(format!("vector length {n} is not a square")));
        }
        Self::new(CMatrix::from_fn(d, d, |i, j| v[i * d + j]))
    }
}

pub(crate) fn check_same_dim(a: &Operator, b: &Operator) -> Result<()> {
    if a.dim() != b.dim() {
        Err(Error::DimensionMismatch {
            expected: a.dim(),
            got: b.dim(),
        })
    } else {
        Ok(())
    }
}

impl<'a> Add<&'a Operator> for &'a Operator {
    type Output = Operator;
    fn add(self, rhs: &'a Operator) -> Operator {
        assert_eq!(self.dim(), rhs.dim(), "operator dimension mismatch");
        Operator { m: &self.m + &rhs.m }
    }
}

impl<'a> Sub<&'a Operator> for &'a Operator {
    type Output = Operator;
    fn sub(self, rhs: &'a Operator) -> Operator {
        assert_eq!(self.dim(), rhs.dim(), "operator dimension mismatch");
        Operator { m: &self.m - &rhs.m }
    }
}

impl<'a> Mul<&'a Operator> for &'a Operator {
    type Output = Operator;
    fn mul(self, rhs: &'a Operator) -> Operator {
        assert_eq!(self.dim(), rhs.dim(), "operator dimension mismatch");
        Operator { m: &self.m * &rhs.m }
    }
}

impl Neg for &Operator {
    type Output = Operator;
    fn neg(self) -> Operator {
        Operator { m: -&self.m }
    }
}

/// Hilbert-Schmidt inner product `Tr(a^dagger b)`, linear in the second slot.
pub fn hs_inner(a: &Operator, b: &Operator) -> Result<Complex64> {
    check_same_dim(a, b)?;
    Ok(a.m.iter().zip(b.m.iter()).map(|(x, y)| x.conj() * y).sum())
}

/// Unit-norm row-major vectorization `A_nm / ||A||` (index `n * dim + m`).
pub fn vectorize(a: &Operator) -> Result<CVector> {
    let n = a.hs_norm();
    if n == 0.0 {
        return Err(Error::ZeroOperator);
    }
    Ok(a.to_vec_row_major() / Complex64::new(n, 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn hs_inner_identity_and_paulis() {
        let id = Operator::identity(2);
        assert_eq!(hs_inner(&id, &id).unwrap(), c(2.0, 0.0));
        assert_eq!(hs_inner(&Operator::pauli_x(), &Operator::pauli_y()).unwrap(), c(0.0, 0.0));
    }

    #[test]
    fn hs_inner_rejects_mismatch() {
        let e = hs_inner(&Operator::identity(2), &Operator::identity(3)).unwrap_err();
        assert!(matches!(e, Error::DimensionMismatch { .. }));
    }

    #[test]
    fn hs_inner_conjugate_symmetric_entrywise() {
        let a = Operator::from_rows(2, &[c(1.0, 2.0), c(0.5, -1.0), c(3.0, 0.0), c(-1.0, 0.25)]).unwrap();
        let b = Operator::from_rows(2, &[c(0.0, 1.0), c(2.0, 2.0), c(-1.0, 0.5), c(1.0, 0.0)]).unwrap();
        // direct sum over entries
        let mut direct = c(0.0, 0.0);
        for i in 0..2 {
            for j in 0..2 {
                direct += a.get(i, j).conj() * b.get(i, j);
            }
        }
        let ab = hs_inner(&a, &b).unwrap();
        assert!((ab - direct).norm() < 1e-14);
        assert!((ab - hs_inner(&b, &a).unwrap().conj()).norm() < 1e-14);
    }

    #[test]
    fn vectorize_examples() {
        let s = 1.0 / 2f64.sqrt();
        let v = vectorize(&Operator::identity(2)).unwrap();
        let want = [s, 0.0, 0.0, s];
        for k in 0..4 {
            assert!((v[k] - c(want[k], 0.0)).norm() < 1e-15);
        }
        let v = vectorize(&Operator::pauli_x()).unwrap();
        let want = [0.0, s, s, 0.0];
        for k in 0..4 {
            assert!((v[k] - c(want[k], 0.0)).norm() < 1e-15);
        }
        assert_eq!(vectorize(&Operator::zeros(2)).unwrap_err(), Error::ZeroOperator);
    }

    #[test]
    fn pauli_commutator() {
        let got = Operator::pauli_z().commutator(&Operator::pauli_x()).unwrap();
        let want = Operator::pauli_y().scale(c(0.0, 2.0));
        assert!((&got - &want).hs_norm() < 1e-15);
    }

    #[test]
    fn rejects_non_square() {
        assert!(matches!(
            Operator::new(CMatrix::zeros(2, 3)),
            Err(Error::NotSquare { rows: 2, cols: 3 })
        ));
    }

    #[test]
    fn row_major_roundtrip() {
        let a = Operator::from_rows(2, &[c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0), c(4.0, 0.0)]).unwrap();
        let v = a.to_vec_row_major();
        assert_eq!(v[1], c(2.0, 0.0));
        assert_eq!(Operator::from_vec_row_major(&v).unwrap(), a);
    }
}
