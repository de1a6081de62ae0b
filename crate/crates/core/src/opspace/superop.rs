use num_complex::Complex64;

use super::operator::Operator;
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, ONE};

/// Largest Hilbert-space dimension stored densely by default.
pub const DENSE_STORAGE_MAX_DIM: usize = 12;
/// Size guard for [`SuperOperator::to_dense`]: a dim-32 superoperator is a
/// 1024x1024 complex matrix.
pub const DENSIFY_MAX_DIM: usize = 32;

#[derive(Debug, Clone, PartialEq)]
enum Repr {
    /// Matrix acting on row-major vectorized operators.
    Dense(CMatrix),
    /// `A -> sum_k L_k A R_k`.
    Factors(Vec<(CMatrix, CMatrix)>),
}

/// Linear map on the space of `dim x dim` operators.
///
/// With row-major vectorization `vec(A)[n * dim + m] = A_nm`, the map
/// `A -> L A R` has the dense matrix `kron(L, R^T)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SuperOperator {
    dim: usize,
    repr: Repr,
}

impl SuperOperator {
    /// Builds `A -> sum_k L_k A R_k`, densifying when `dim` is small.
    pub fn from_factors(dim: usize, pairs: Vec<(CMatrix, CMatrix)>) -> Result<Self> {
        for (l, r) in &pairs {
            for m in [l, r] {
                if m.nrows() != dim || m.ncols() != dim {
                    return Err(Error::DimensionMismatch {
                        expected: dim,
                        got: m.nrows(),
                    });
                }
            }
        }
        let s = Self {
            dim,
            repr: Repr::Factors(pairs),
        };
        if dim <= DENSE_STORAGE_MAX_DIM {
            Ok(Self {
                dim,
                repr: Repr::Dense(s.to_dense()?),
            })
        } else {
            Ok(s)
        }
    }

    /// Keeps the factor-pair form regardless of dimension.
    pub fn from_factors_lazy(dim: usize, pairs: Vec<(CMatrix, CMatrix)>) -> Result<Self> {
        for (l, r) in &pairs {
            if l.shape() != (dim, dim) || r.shape() != (dim, dim) {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: l.nrows().max(r.nrows()),
                });
            }
        }
        Ok(Self {
            dim,
            repr: Repr::Factors(pairs),
        })
    }

    pub fn from_dense(dim: usize, m: CMatrix) -> Result<Self> {
        if m.shape() != (dim * dim, dim * dim) {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                got: m.nrows(),
            });
        }
        Ok(Self {
            dim,
            repr: Repr::Dense(m),
        })
    }

    pub fn identity(dim: usize) -> Self {
        let id = CMatrix::identity(dim, dim);
        Self::from_factors(dim, vec![(id.clone(), id)]).expect("consistent shapes")
    }

    pub fn zero(dim: usize) -> Self {
        Self::from_factors(dim, Vec::new()).expect("consistent shapes")
    }

    /// `A -> L A`.
    pub fn left(l: &Operator) -> Self {
        let d = l.dim();
        Self::from_factors(d, vec![(l.matrix().clone(), CMatrix::identity(d, d))]).expect("consistent shapes")
    }

    /// `A -> A R`.
    pub fn right(r: &Operator) -> Self {
        let d = r.dim();
        Self::from_factors(d, vec![(CMatrix::identity(d, d), r.matrix().clone())]).expect("consistent shapes")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_dense(&self) -> bool {
        matches!(self.repr, Repr::Dense(_))
    }

    /// Factor pairs, when stored in that form.
    pub fn factors(&self) -> Option<&[(CMatrix, CMatrix)]> {
        match &self.repr {
            Repr::Factors(p) => Some(p),
            Repr::Dense(_) => None,
        }
    }

    pub fn apply(&self, a: &Operator) -> Result<Operator> {
        if a.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: a.dim(),
            });
        }
        match &self.repr {
            Repr::Dense(m) => Operator::from_vec_row_major(&(m * a.to_vec_row_major())),
            Repr::Factors(pairs) => {
                let mut out = CMatrix::zeros(self.dim, self.dim);
                for (l, r) in pairs {
                    out += l * a.matrix() * r;
                }
                Operator::new(out)
            }
        }
    }

    /// Dense `dim^2 x dim^2` matrix in the row-major convention.
    pub fn to_dense(&self) -> Result<CMatrix> {
        match &self.repr {
            Repr::Dense(m) => Ok(m.clone()),
            Repr::Factors(pairs) => {
                if self.dim > DENSIFY_MAX_DIM {
                    return Err(Error::TooLargeForDense {
                        dim: self.dim,
                        max: DENSIFY_MAX_DIM,
                    });
                }
                let n = self.dim * self.dim;
                let mut out = CMatrix::zeros(n, n);
                for (l, r) in pairs {
                    out += linalg::kron(l, &r.transpose());
                }
                Ok(out)
            }
        }
    }

    /// Densified copy (subject to the size guard).
    pub fn densify(&self) -> Result<Self> {
        Ok(Self {
            dim: self.dim,
            repr: Repr::Dense(self.to_dense()?),
        })
    }

    /// Adjoint with respect to the Hilbert-Schmidt inner product.
    pub fn adjoint(&self) -> Self {
        let repr = match &self.repr {
            Repr::Dense(m) => Repr::Dense(m.adjoint()),
            Repr::Factors(p) => Repr::Factors(p.iter().map(|(l, r)| (l.adjoint(), r.adjoint())).collect()),
        };
        Self { dim: self.dim, repr }
    }

    /// `self o other`: apply `other` first.
    pub fn compose(&self, other: &SuperOperator) -> Result<Self> {
        self.check_dim(other)?;
        match (&self.repr, &other.repr) {
            (Repr::Factors(a), Repr::Factors(b)) => {
                let mut pairs = Vec::with_capacity(a.len() * b.len());
                for (l1, r1) in a {
                    for (l2, r2) in b {
                        pairs.push((l1 * l2, r2 * r1));
                    }
                }
                Ok(Self {
                    dim: self.dim,
                    repr: Repr::Factors(pairs),
                })
            }
            _ => Self::from_dense(self.dim, self.to_dense()? * other.to_dense()?),
        }
    }

    pub fn add(&self, other: &SuperOperator) -> Result<Self> {
        self.lin_comb(ONE, other, ONE)
    }

    pub fn sub(&self, other: &SuperOperator) -> Result<Self> {
        self.lin_comb(ONE, other, -ONE)
    }

    /// `x * self + y * other`.
    pub fn lin_comb(&self, x: Complex64, other: &SuperOperator, y: Complex64) -> Result<Self> {
        self.check_dim(other)?;
        match (&self.repr, &other.repr) {
            (Repr::Factors(a), Repr::Factors(b)) => {
                let mut pairs: Vec<_> = a.iter().map(|(l, r)| (l * x, r.clone())).collect();
                pairs.extend(b.iter().map(|(l, r)| (l * y, r.clone())));
                Ok(Self {
                    dim: self.dim,
                    repr: Repr::Factors(pairs),
                })
            }
            _ => Self::from_dense(self.dim, self.to_dense()? * x + other.to_dense()? * y),
        }
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let repr = match &self.repr {
            Repr::Dense(m) => Repr::Dense(m * s),
            Repr::Factors(p) => Repr::Factors(p.iter().map(|(l, r)| (l * s, r.clone())).collect()),
        };
        Self { dim: self.dim, repr }
    }

    /// `[self, other]`.
    pub fn commutator(&self, other: &SuperOperator) -> Result<Self> {
        self.compose(other)?.sub(&other.compose(self)?)
    }

    /// Frobenius norm of the dense form.
    pub fn dense_norm(&self) -> Result<f64> {
        Ok(linalg::fro(&self.to_dense()?))
    }

    /// The dense form viewed as an operator on the `dim^2`-dimensional space.
    pub fn as_operator(&self) -> Result<Operator> {
        Operator::new(self.to_dense()?)
    }

    fn check_dim(&self, other: &SuperOperator) -> Result<()> {
        if self.dim != other.dim {
            Err(Error::DimensionMismatch {
                expected: self.dim,
                got: other.dim,
            })
        } else {
            Ok(())
        }
    }
}

/// Liouvillian `A -> hA - Ah`.
pub fn liouvillian(h: &Operator) -> SuperOperator {
    let d = h.dim();
    let id = CMatrix::identity(d, d);
    SuperOperator::from_factors(d, vec![(h.matrix().clone(), id.clone()), (-id, h.matrix().clone())])
        .expect("consistent shapes")
}

/// Super Liouvillian `X -> [L, X]` acting on superoperators over the same
/// space as `l`. The result acts on operators of dimension `dim^2`, i.e. on
/// the dense matrices of superoperators.
pub fn super_liouvillian(l: &SuperOperator) -> Result<SuperOperator> {
    Ok(liouvillian(&l.as_operator()?))
}
