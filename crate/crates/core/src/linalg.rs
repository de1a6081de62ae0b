//! Dense linear algebra helpers shared by the operator-space layers.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

/// Eigendecomposition of a Hermitian matrix with eigenvalues sorted ascending.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    /// Columns are the eigenvectors matching `values`.
    pub vectors: CMatrix,
}

/// Hermitian eigendecomposition. The input is symmetrized first.
pub fn eigh(m: &CMatrix) -> HermitianEigen {
    let n = m.nrows();
    let sym = (m + m.adjoint()).scale(0.5);
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vectors = CMatrix::zeros(n, n);
    for (col, &k) in order.iter().enumerate() {
        vectors.set_column(col, &eig.eigenvectors.column(k));
    }
    HermitianEigen { values, vectors }
}

/// Real symmetric eigendecomposition, eigenvalues ascending.
pub fn eigh_real(m: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let n = m.nrows();
    let sym = (m + m.transpose()).scale(0.5);
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vectors = DMatrix::zeros(n, n);
    for (col, &k) in order.iter().enumerate() {
        vectors.set_column(col, &eig.eigenvectors.column(k));
    }
    (values, vectors)
}

/// Groups sorted values into clusters whose consecutive members differ by at
/// most `tol`. Returns index ranges into the sorted slice.
pub fn cluster_sorted(values: &[f64], tol: f64) -> Vec<std::ops::Range<usize>> {
    let mut out = Vec::new();
    let mut start = 0;
    for k in 1..=values.len() {
        if k == values.len() || (values[k] - values[k - 1]).abs() > tol {
            if k > start {
                out.push(start..k);
            }
            start = k;
        }
    }
    out
}

/// `exp(i t H)` for Hermitian `H`, built from its eigendecomposition so the
/// result is unitary to rounding.
pub fn expm_i_hermitian(h: &CMatrix, t: f64) -> CMatrix {
    let eig = eigh(h);
    let n = h.nrows();
    let mut scaled = eig.vectors.clone();
    for (k, &e) in eig.values.iter().enumerate() {
        let phase = Complex64::from_polar(1.0, e * t);
        for r in 0..n {
            scaled[(r, k)] *= phase;
        }
    }
    &scaled * eig.vectors.adjoint()
}

/// Hilbert-Schmidt norm.
pub fn fro(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Deviation from Hermiticity, `||M - M^dagger||_F`.
pub fn hermiticity_defect(m: &CMatrix) -> f64 {
    fro(&(m - m.adjoint()))
}

/// Orthonormal basis (as columns) of the null space of `m`, using singular
/// values below `rel_tol * sigma_max`.
pub fn null_space(m: &CMatrix, rel_tol: f64) -> CMatrix {
    let (nrows, ncols) = m.shape();
    if nrows == 0 || ncols == 0 {
        return CMatrix::identity(ncols, ncols);
    }
    // pad wide inputs with zero rows so the SVD returns a full set of right
    // singular vectors
    let padded = if nrows < ncols {
        let mut p = CMatrix::zeros(ncols, ncols);
        p.rows_mut(0, nrows).copy_from(m);
        p
    } else {
        m.clone()
    };
    let svd = nalgebra::SVD::new(padded, false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let sigma_max = svd.singular_values.max();
    if sigma_max == 0.0 {
        return CMatrix::identity(ncols, ncols);
    }
    let keep: Vec<usize> = (0..ncols)
        .filter(|&k| svd.singular_values[k] <= rel_tol * sigma_max)
        .collect();
    let mut basis = CMatrix::zeros(ncols, keep.len());
    for (c, &k) in keep.iter().enumerate() {
        basis.set_column(c, &v_t.row(k).adjoint());
    }
    basis
}

/// Polishes the columns of `v` into an orthonormal set using modified
/// Gram-Schmidt, dropping columns whose residual norm falls below `tol`.
pub fn orthonormalize(v: &CMatrix, tol: f64) -> CMatrix {
    let mut cols: Vec<CVector> = Vec::new();
    for j in 0..v.ncols() {
        let mut w: CVector = v.column(j).into_owned();
        for _ in 0..2 {
            for q in &cols {
                let c = q.dotc(&w);
                w -= q * c;
            }
        }
        let n = w.norm();
        if n > tol {
            cols.push(w / Complex64::new(n, 0.0));
        }
    }
    if cols.is_empty() {
        return CMatrix::zeros(v.nrows(), 0);
    }
    CMatrix::from_columns(&cols)
}

/// Kronecker product.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    let mut out = CMatrix::zeros(ar * br, ac * bc);
    for i in 0..ar {
        for j in 0..ac {
            let s = a[(i, j)];
            if s == ZERO {
                continue;
            }
            for k in 0..br {
                for l in 0..bc {
                    out[(i * br + k, j * bc + l)] = s * b[(k, l)];
                }
            }
        }
    }
    out
}

pub fn to_complex(m: &DMatrix<f64>) -> CMatrix {
    m.map(|x| Complex64::new(x, 0.0))
}

/// Composite trapezoidal rule on a non-uniform grid.
pub fn trapezoid(x: &[f64], y: &[f64]) -> f64 {
    x.windows(2)
        .zip(y.windows(2))
        .map(|(xs, ys)| 0.5 * (xs[1] - xs[0]) * (ys[0] + ys[1]))
        .sum()
}

/// Angle `arccos(1 - deficit)` evaluated without cancellation near zero.
///
/// `deficit = 1 - cos(angle)` must be supplied directly by callers that can
/// form it stably.
pub fn angle_from_deficit(deficit: f64) -> f64 {
    let d = deficit.clamp(0.0, 2.0);
    if d <= 1.0 {
        2.0 * (0.5 * d).sqrt().asin()
    } else {
        (1.0 - d).acos()
    }
}

/// `arccos(r)` from `1 - r` and `1 + r` supplied separately, so the angle
/// stays accurate at both ends of `[0, pi]`.
pub fn angle_from_split(deficit: f64, surplus: f64) -> f64 {
    let (d, s) = (deficit.max(0.0), surplus.max(0.0));
    (d * s).sqrt().atan2(0.5 * (s - d))
}
