use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg;
use crate::opspace::Operator;

/// Real symmetric tridiagonal matrix with diagonal `h` and off-diagonal `v`
/// (`H_{n,n+1} = H_{n+1,n} = v_n`).
#[derive(Debug, Clone, PartialEq)]
pub struct TridiagonalHamiltonian {
    h: Vec<f64>,
    v: Vec<f64>,
}

impl TridiagonalHamiltonian {
    pub fn new(h: Vec<f64>, v: Vec<f64>) -> Result<Self> {
        if h.is_empty() {
            return Err(Error::InvalidArgument("tridiagonal matrix needs at least one site".into()));
        }
        if v.len() + 1 != h.len() {
            return Err(Error::DimensionMismatch {
                expected: h.len() - 1,
                got: v.len(),
            });
        }
        if h.iter().chain(&v).any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument("non-finite tridiagonal entry".into()));
        }
        Ok(Self { h, v })
    }

    /// Reads the band of a symmetric operator. Entries outside the band and
    /// imaginary parts must vanish to `tol` (absolute).
    pub fn from_operator(op: &Operator, tol: f64) -> Result<Self> {
        let n = op.dim();
        let mut off_band = 0.0_f64;
        for i in 0..n {
            for j in 0..n {
                let z = op.get(i, j);
                off_band = off_band.max(z.im.abs());
                if i.abs_diff(j) > 1 {
                    off_band = off_band.max(z.norm());
                }
            }
        }
        if off_band > tol || !op.is_hermitian(tol) {
            return Err(Error::InvalidArgument(format!(
                "operator is not real symmetric tridiagonal (defect {off_band:.3e})"
            )));
        }
        let h = (0..n).map(|i| op.get(i, i).re).collect();
        let v = (0..n.saturating_sub(1)).map(|i| op.get(i, i + 1).re).collect();
        Self::new(h, v)
    }

    pub fn n(&self) -> usize {
        self.h.len()
    }

    pub fn diag(&self) -> &[f64] {
        &self.h
    }

    pub fn offdiag(&self) -> &[f64] {
        &self.v
    }

    pub fn to_real_matrix(&self) -> DMatrix<f64> {
        let n = self.n();
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = self.h[i];
        }
        for (i, &x) in self.v.iter().enumerate() {
            m[(i, i + 1)] = x;
            m[(i + 1, i)] = x;
        }
        m
    }

    pub fn to_operator(&self) -> Operator {
        Operator::from_real(&self.to_real_matrix()).expect("square by construction")
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        linalg::eigh_real(&self.to_real_matrix()).0
    }

    /// `Tr H^2 = sum h_n^2 + 2 sum v_n^2`.
    pub fn norm_sq(&self) -> f64 {
        self.h.iter().map(|x| x * x).sum::<f64>() + self.offdiag_sq()
    }

    /// `sum_{m != n} H_mn^2 = 2 sum v_n^2`.
    pub fn offdiag_sq(&self) -> f64 {
        2.0 * self.v.iter().map(|x| x * x).sum::<f64>()
    }

    /// Partial traces `sum_{n <= k} h_n` for `k = 1..N`.
    pub fn partial_traces(&self) -> Vec<f64> {
        self.h
            .iter()
            .scan(0.0, |acc, x| {
                *acc += x;
                Some(*acc)
            })
            .collect()
    }
}

/// Right-hand side of the Toda equations,
/// `dh_n = 2(v_n^2 - v_{n-1}^2)`, `dv_n = v_n (h_{n+1} - h_n)`, with
/// `v_0 = v_N = 0`.
pub fn toda_rhs(t: &TridiagonalHamiltonian) -> (Vec<f64>, Vec<f64>) {
    let mut dh = vec![0.0; t.n()];
    let mut dv = vec![0.0; t.v.len()];
    toda_rhs_into(&t.h, &t.v, &mut dh, &mut dv);
    (dh, dv)
}

pub(crate) fn toda_rhs_into(h: &[f64], v: &[f64], dh: &mut [f64], dv: &mut [f64]) {
    let n = h.len();
    for i in 0..n {
        let up = if i + 1 < n { v[i] * v[i] } else { 0.0 };
        let down = if i > 0 { v[i - 1] * v[i - 1] } else { 0.0 };
        dh[i] = 2.0 * (up - down);
    }
    for i in 0..v.len() {
        dv[i] = v[i] * (h[i + 1] - h[i]);
    }
}
