use std::fmt;
use std::sync::Arc;

use nalgebra::{ComplexField, DMatrix};

use super::tridiagonal::TridiagonalHamiltonian;
use crate::error::Result;
use crate::opspace::Operator;

/// User-supplied generator `(l, H) -> eta`.
pub type CustomGenerator = Arc<dyn Fn(f64, &Operator) -> Operator + Send + Sync>;

/// Choice of generator `eta(l)` in `dH/dl = [eta, H]`.
#[derive(Clone)]
pub enum GeneratorKind {
    /// `eta = [H_T, H]` with `H_T` the diagonal part.
    Wegner,
    /// `eta_nm = H_nm sgn(m - n)`.
    Toda,
    Custom(CustomGenerator),
}

impl GeneratorKind {
    pub fn name(&self) -> &'static str {
        match self {
            GeneratorKind::Wegner => "wegner",
            GeneratorKind::Toda => "toda",
            GeneratorKind::Custom(_) => "custom",
        }
    }
}

impl fmt::Debug for GeneratorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl PartialEq for GeneratorKind {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (GeneratorKind::Wegner, GeneratorKind::Wegner) | (GeneratorKind::Toda, GeneratorKind::Toda) => true,
            (GeneratorKind::Custom(a), GeneratorKind::Custom(b)) => Arc::ptr_eq(a, b),
            _ => false,
        }
    }
}

pub(crate) fn wegner_eta<T: ComplexField<RealField = f64> + Copy>(h: &DMatrix<T>) -> DMatrix<T> {
    let n = h.nrows();
    DMatrix::from_fn(n, n, |i, j| (h[(i, i)] - h[(j, j)]) * h[(i, j)])
}

pub(crate) fn toda_eta<T: ComplexField<RealField = f64> + Copy>(h: &DMatrix<T>) -> DMatrix<T> {
    let n = h.nrows();
    DMatrix::from_fn(n, n, |i, j| {
        if j > i {
            h[(i, j)]
        } else if j < i {
            -h[(i, j)]
        } else {
            T::zero()
        }
    })
}

/// `[H_T, h]`; anti-Hermitian with zero diagonal for Hermitian `h`.
pub fn wegner_generator(h: &Operator) -> Result<Operator> {
    h.require_hermitian()?;
    Operator::new(wegner_eta(h.matrix()))
}

/// `eta_nm = H_nm sgn(m - n)`.
pub fn toda_generator(h: &Operator) -> Result<Operator> {
    h.require_hermitian()?;
    Operator::new(toda_eta(h.matrix()))
}

/// Toda generator of a tridiagonal matrix: `+v_n` above and `-v_n` below
/// the diagonal.
pub fn toda_generator_tridiagonal(t: &TridiagonalHamiltonian) -> Operator {
    toda_generator(&t.to_operator()).expect("tridiagonal matrices are symmetric")
}
