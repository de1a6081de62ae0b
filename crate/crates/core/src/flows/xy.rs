use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use crate::opspace::Operator;

/// Largest chain for which the full `2^N` Hamiltonian is built and checked.
pub const XY_FULL_SPACE_MAX_N: usize = 8;

#[derive(Debug, Clone, PartialEq)]
pub struct FullSpaceCheck {
    /// `||[H, M]||` with `M = sum_n Z_n`.
    pub magnetization_commutator: f64,
    /// Largest entry mismatch between the extracted sector block and
    /// `sector + offset * 1`.
    pub sector_residual: f64,
}

/// Single-flip sector of the isotropic XY chain
/// `H = 1/2 sum v_n (X_n X_{n+1} + Y_n Y_{n+1}) + 1/2 sum h_n Z_n`.
///
/// In the sector `M = -(N - 2)` (one spin up), with basis state `n` carrying
/// the up spin, the block equals `tridiag(h, v) + offset * 1` where
/// `offset = -1/2 sum h_n`. The constant shift is dropped from `sector`.
#[derive(Debug, Clone, PartialEq)]
pub struct XyEmbedding {
    pub sector: Operator,
    pub offset: f64,
    /// Present when `N <= XY_FULL_SPACE_MAX_N`.
    pub full_space: Option<FullSpaceCheck>,
}

fn pauli_chain(n: usize, site: usize, p: &CMatrix) -> CMatrix {
    let id = CMatrix::identity(2, 2);
    let mut out = CMatrix::identity(1, 1);
    for s in 0..n {
        out = linalg::kron(&out, if s == site { p } else { &id });
    }
    out
}

/// Full `2^N` XY Hamiltonian; site 0 is the most significant qubit and
/// `Z|0> = |0>` (spin up).
pub fn xy_hamiltonian(v: &[f64], h: &[f64]) -> Result<Operator> {
    let n = h.len();
    if v.len() + 1 != n {
        return Err(Error::DimensionMismatch {
            expected: n.saturating_sub(1),
            got: v.len(),
        });
    }
    let (x, y, z) = (
        Operator::pauli_x().into_matrix(),
        Operator::pauli_y().into_matrix(),
        Operator::pauli_z().into_matrix(),
    );
    let dim = 1usize << n;
    let mut m = CMatrix::zeros(dim, dim);
    for (k, &vk) in v.iter().enumerate() {
        let xx = pauli_chain(n, k, &x) * pauli_chain(n, k + 1, &x);
        let yy = pauli_chain(n, k, &y) * pauli_chain(n, k + 1, &y);
        m += (xx + yy).scale(0.5 * vk);
    }
    for (k, &hk) in h.iter().enumerate() {
        m += pauli_chain(n, k, &z).scale(0.5 * hk);
    }
    Operator::new(m)
}

pub fn xy_embed(v: &[f64], h: &[f64]) -> Result<XyEmbedding> {
    let n = h.len();
    if n < 2 {
        return Err(Error::InvalidArgument("XY chain needs at least two sites".into()));
    }
    if v.len() + 1 != n {
        return Err(Error::DimensionMismatch {
            expected: n - 1,
            got: v.len(),
        });
    }
    let mut t = DMatrix::zeros(n, n);
    for k in 0..n {
        t[(k, k)] = h[k];
    }
    for (k, &x) in v.iter().enumerate() {
        t[(k, k + 1)] = x;
        t[(k + 1, k)] = x;
    }
    let sector = Operator::from_real(&t)?;
    let offset = -0.5 * h.iter().sum::<f64>();

    let full_space = if n <= XY_FULL_SPACE_MAX_N {
        let full = xy_hamiltonian(v, h)?;
        let dim = 1usize << n;
        let mut mag = CMatrix::zeros(dim, dim);
        for s in 0..dim {
            let ups = n as i64 - s.count_ones() as i64;
            mag[(s, s)] = crate::Complex64::new((2 * ups - n as i64) as f64, 0.0);
        }
        let comm = full.commutator(&Operator::new(mag)?)?.hs_norm();
        // basis state with only site k up: every bit set except bit (n-1-k)
        let all = dim - 1;
        let index = |k: usize| all & !(1usize << (n - 1 - k));
        let mut residual = 0.0_f64;
        for a in 0..n {
            for b in 0..n {
                let want = t[(a, b)] + if a == b { offset } else { 0.0 };
                residual = residual.max((full.get(index(a), index(b)) - want).norm());
            }
        }
        Some(FullSpaceCheck {
            magnetization_commutator: comm,
            sector_residual: residual,
        })
    } else {
        None
    };
    Ok(XyEmbedding {
        sector,
        offset,
        full_space,
    })
}
