use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Relative tolerance on the finite-dimension closure `2 gamma = |alpha| (D - 1)`.
const CLOSURE_TOL: f64 = 1e-12;

/// Parameters of a closed complexity algebra,
/// `b_n^2 = alpha n (n - 1) / 4 + gamma n / 2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlgebraParams {
    pub alpha: f64,
    pub gamma: f64,
    pub d: usize,
}

impl AlgebraParams {
    /// Validates `alpha < 0` and `2 gamma = |alpha| (D - 1)`.
    pub fn new(alpha: f64, gamma: f64, d: usize) -> Result<Self> {
        if d < 2 {
            return Err(Error::InvalidArgument(format!("Krylov dimension must be >= 2, got {d}")));
        }
        if !(alpha < 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "finite Krylov dimension needs alpha < 0, got {alpha}"
            )));
        }
        let want = alpha.abs() * (d - 1) as f64;
        if !((2.0 * gamma - want).abs() <= CLOSURE_TOL * want) {
            return Err(Error::InvalidArgument(format!(
                "closure needs 2 gamma = |alpha| (D - 1) = {want}, got 2 gamma = {}",
                2.0 * gamma
            )));
        }
        Ok(Self { alpha, gamma, d })
    }

    /// SU(2) parameters with `gamma` fixed by the closure condition.
    pub fn su2(alpha: f64, d: usize) -> Result<Self> {
        Self::new(alpha, alpha.abs() * d.saturating_sub(1) as f64 / 2.0, d)
    }

    /// Oscillation frequency `sqrt(|alpha|)`.
    pub fn frequency(&self) -> f64 {
        self.alpha.abs().sqrt()
    }

    /// `b_n` from the closed-algebra formula; zero at `n = 0` and `n = D`.
    pub fn b(&self, n: usize) -> f64 {
        let nf = n as f64;
        (self.alpha * nf * (nf - 1.0) / 4.0 + self.gamma * nf / 2.0).max(0.0).sqrt()
    }
}

/// Abstract Krylov chain `O_0 .. O_{D-1}` with Lanczos coefficients
/// `b_1 .. b_{D-1}`. The Liouvillian in this basis is the real symmetric
/// tridiagonal matrix with off-diagonals `b_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct KrylovChain {
    b: Vec<f64>,
}

impl KrylovChain {
    pub fn new(b: Vec<f64>) -> Result<Self> {
        if let Some(x) = b.iter().find(|x| !(x.is_finite() && **x > 0.0)) {
            return Err(Error::InvalidArgument(format!("Lanczos coefficients must be positive, got {x}")));
        }
        Ok(Self { b })
    }

    /// Krylov dimension `D`.
    pub fn d(&self) -> usize {
        self.b.len() + 1
    }

    /// `b_1 .. b_{D-1}`.
    pub fn b(&self) -> &[f64] {
        &self.b
    }

    /// `b_1`, or zero for a one-dimensional chain.
    pub fn b1(&self) -> f64 {
        self.b.first().copied().unwrap_or(0.0)
    }

    /// `L_+`, mapping `O_n -> b_{n+1} O_{n+1}`.
    pub fn raising(&self) -> DMatrix<f64> {
        let d = self.d();
        let mut m = DMatrix::zeros(d, d);
        for (n, &b) in self.b.iter().enumerate() {
            m[(n + 1, n)] = b;
        }
        m
    }

    /// `L = L_+ + L_-`.
    pub fn liouvillian(&self) -> DMatrix<f64> {
        let r = self.raising();
        &r + r.transpose()
    }

    /// `B = L_+ - L_-`, antisymmetric.
    pub fn b_op(&self) -> DMatrix<f64> {
        let r = self.raising();
        &r - r.transpose()
    }

    /// Complexity operator `K = diag(0, 1, .., D-1)`.
    pub fn k_op(&self) -> DMatrix<f64> {
        DMatrix::from_diagonal(&nalgebra::DVector::from_fn(self.d(), |n, _| n as f64))
    }

    /// `K - (Tr K / D) 1`.
    pub fn k_bar_op(&self) -> DMatrix<f64> {
        let c = self.trace_k() / self.d() as f64;
        DMatrix::from_diagonal(&nalgebra::DVector::from_fn(self.d(), |n, _| n as f64 - c))
    }

    /// `Tr K = D (D - 1) / 2`.
    pub fn trace_k(&self) -> f64 {
        let d = self.d() as f64;
        d * (d - 1.0) / 2.0
    }

    /// `|K|^2 = sum n^2`.
    pub fn k_norm_sq(&self) -> f64 {
        (0..self.d()).map(|n| (n * n) as f64).sum()
    }

    /// `|K - (Tr K / D) 1|^2`.
    pub fn k_bar_norm_sq(&self) -> f64 {
        let c = self.trace_k() / self.d() as f64;
        (0..self.d()).map(|n| (n as f64 - c).powi(2)).sum()
    }

    /// `|B|^2 = 2 sum b_n^2`.
    pub fn b_norm_sq(&self) -> f64 {
        2.0 * self.b.iter().map(|b| b * b).sum::<f64>()
    }

    /// Tridiagonal matrix-vector product `y = L x` without forming `L`.
    pub fn apply_liouvillian(&self, x: &[f64], y: &mut [f64]) {
        let d = self.d();
        for n in 0..d {
            let mut acc = 0.0;
            if n > 0 {
                acc += self.b[n - 1] * x[n - 1];
            }
            if n + 1 < d {
                acc += self.b[n] * x[n + 1];
            }
            y[n] = acc;
        }
    }
}

/// Chain with the SU(2) Lanczos coefficients of `params`.
pub fn su2_chain(params: &AlgebraParams) -> Result<KrylovChain> {
    let params = AlgebraParams::new(params.alpha, params.gamma, params.d)?;
    let b: Vec<f64> = (1..params.d).map(|n| params.b(n)).collect();
    let b_d = params.b(params.d);
    // b_D vanishes analytically; the radicand is a rounding-level number
    let radicand = params.alpha * (params.d * (params.d - 1)) as f64 / 4.0 + params.gamma * params.d as f64 / 2.0;
    if radicand.abs() > 1e-9 * params.gamma * params.d as f64 || b_d > 1e-6 {
        return Err(Error::InvalidArgument(format!("b_D = {b_d} does not vanish")));
    }
    KrylovChain::new(b)
}
