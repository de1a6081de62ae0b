use nalgebra::{DMatrix, DVector};

use super::chain::{su2_chain, AlgebraParams, KrylovChain};
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use crate::Complex64;

/// Largest chain for which `K_t` is formed as a dense matrix.
pub const DENSE_CHAIN_MAX_D: usize = 400;

/// Eigendecomposition of the chain Liouvillian, reused across times.
#[derive(Debug, Clone)]
pub struct ChainSpectrum {
    pub values: Vec<f64>,
    pub vectors: DMatrix<f64>,
}

impl ChainSpectrum {
    pub fn new(chain: &KrylovChain) -> Self {
        let (values, vectors) = linalg::eigh_real(&chain.liouvillian());
        Self { values, vectors }
    }

    fn d(&self) -> usize {
        self.values.len()
    }

    /// `exp(i s L t)` as a dense matrix, for `s = +1` or `-1`.
    fn propagator(&self, t: f64, sign: f64) -> CMatrix {
        let d = self.d();
        let mut scaled = linalg::to_complex(&self.vectors);
        for (k, &e) in self.values.iter().enumerate() {
            let phase = Complex64::from_polar(1.0, sign * e * t);
            for r in 0..d {
                scaled[(r, k)] *= phase;
            }
        }
        scaled * linalg::to_complex(&self.vectors.transpose())
    }

    /// Operator wavefunction `phi(t) = exp(iLt) e_0`.
    pub fn wavefunction(&self, t: f64) -> DVector<Complex64> {
        let d = self.d();
        DVector::from_fn(d, |r, _| {
            (0..d)
                .map(|k| Complex64::from_polar(self.vectors[(0, k)], self.values[k] * t) * self.vectors[(r, k)])
                .sum()
        })
    }

    /// `Tr(M exp(-iLt) M exp(iLt))` for a real symmetric `M`, evaluated as
    /// `sum_jk |M'_jk|^2 exp(i (l_k - l_j) t)` in the eigenbasis.
    pub fn autocorrelation(&self, m: &DMatrix<f64>, times: &[f64]) -> Vec<Complex64> {
        let mp = self.vectors.transpose() * m * &self.vectors;
        let d = self.d();
        times
            .iter()
            .map(|&t| {
                let mut acc = Complex64::new(0.0, 0.0);
                for j in 0..d {
                    for k in 0..d {
                        let w = mp[(j, k)] * mp[(j, k)];
                        if w != 0.0 {
                            acc += Complex64::from_polar(w, (self.values[k] - self.values[j]) * t);
                        }
                    }
                }
                acc
            })
            .collect()
    }
}

/// Krylov complexity along a time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexityTrajectory {
    pub t: Vec<f64>,
    pub k: Vec<f64>,
    pub delta_k: Vec<f64>,
    pub dk_dt: Vec<f64>,
    /// `2 b_1 dK - |dK/dt|`; non-negative by the dispersion bound.
    pub residual: Vec<f64>,
}

impl ComplexityTrajectory {
    pub fn min_residual(&self) -> f64 {
        self.residual.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_abs_residual(&self) -> f64 {
        self.residual.iter().fold(0.0, |m, r| m.max(r.abs()))
    }
}

/// Evolves `phi(t) = exp(iLt) e_0` on the chain and records `K = <K>`, its
/// spread, the exact rate `dK/dt = i <B>` and the dispersion-bound residual.
pub fn complexity_trajectory(chain: &KrylovChain, t_grid: &[f64]) -> ComplexityTrajectory {
    let spec = ChainSpectrum::new(chain);
    let b = chain.b();
    let two_b1 = 2.0 * chain.b1();
    let mut out = ComplexityTrajectory {
        t: t_grid.to_vec(),
        k: Vec::with_capacity(t_grid.len()),
        delta_k: Vec::with_capacity(t_grid.len()),
        dk_dt: Vec::with_capacity(t_grid.len()),
        residual: Vec::with_capacity(t_grid.len()),
    };
    for &t in t_grid {
        let phi = spec.wavefunction(t);
        let p: Vec<f64> = phi.iter().map(|z| z.norm_sqr()).collect();
        let total: f64 = p.iter().sum();
        let k = p.iter().enumerate().map(|(n, w)| n as f64 * w).sum::<f64>() / total;
        let var = p.iter().enumerate().map(|(n, w)| (n as f64 - k).powi(2) * w).sum::<f64>() / total;
        let dk: f64 = -2.0
            * b.iter()
                .enumerate()
                .map(|(n, bn)| bn * (phi[n + 1].conj() * phi[n]).im)
                .sum::<f64>()
            / total;
        let spread = var.max(0.0).sqrt();
        out.k.push(k);
        out.delta_k.push(spread);
        out.dk_dt.push(dk);
        out.residual.push(two_b1 * spread - dk.abs());
    }
    out
}

/// `K(t) = (D - 1) sin^2(w t / 2)` and `dK(t) = sqrt(j / 2) |sin(w t)|`,
/// `j = (D - 1) / 2`, for an SU(2) chain.
pub fn su2_complexity(params: &AlgebraParams, t: f64) -> (f64, f64) {
    let w = params.frequency();
    let dm1 = (params.d - 1) as f64;
    let k = dm1 * (0.5 * w * t).sin().powi(2);
    let dk = (dm1 / 4.0).sqrt() * (w * t).sin().abs();
    (k, dk)
}

/// Residuals of the closure relations
/// `[K~, L] = alpha B`, `[K~, B] = alpha L`, `K~ = alpha K + gamma 1`,
/// with `K~ = [L, B]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosureResiduals {
    pub alpha: f64,
    pub gamma: f64,
    /// `|[K~, L] - alpha B|`.
    pub comm_l: f64,
    /// `|[K~, B] - alpha L|`.
    pub comm_b: f64,
    /// `|K~ - (alpha K + gamma 1)|`.
    pub linear: f64,
}

impl ClosureResiduals {
    pub fn max(&self) -> f64 {
        self.comm_l.max(self.comm_b).max(self.linear)
    }
}

/// Closure check. Without `params` the pair `(alpha, gamma)` is fitted by
/// least squares to the diagonal of `K~`.
pub fn algebra_closure_check(chain: &KrylovChain, params: Option<(f64, f64)>) -> ClosureResiduals {
    let l = chain.liouvillian();
    let b = chain.b_op();
    let k = chain.k_op();
    let kt = &l * &b - &b * &l;
    let d = chain.d();
    let (alpha, gamma) = params.unwrap_or_else(|| {
        if d == 1 {
            return (0.0, 0.0);
        }
        let n = d as f64;
        let xs: Vec<f64> = (0..d).map(|i| i as f64).collect();
        let mx = xs.iter().sum::<f64>() / n;
        let my = (0..d).map(|i| kt[(i, i)]).sum::<f64>() / n;
        let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
        let sxy: f64 = xs.iter().enumerate().map(|(i, x)| (x - mx) * (kt[(i, i)] - my)).sum();
        let a = sxy / sxx;
        (a, my - a * mx)
    });
    let id = DMatrix::<f64>::identity(d, d);
    ClosureResiduals {
        alpha,
        gamma,
        comm_l: (&kt * &l - &l * &kt - b.scale(alpha)).norm(),
        comm_b: (&kt * &b - &b * &kt - l.scale(alpha)).norm(),
        linear: (&kt - k.scale(alpha) - id.scale(gamma)).norm(),
    }
}

/// `K_t = exp(-iLt) K exp(iLt)` by dense exponentiation.
pub fn super_heisenberg_k(chain: &KrylovChain, t: f64) -> Result<CMatrix> {
    if chain.d() > DENSE_CHAIN_MAX_D {
        return Err(Error::TooLargeForDense {
            dim: chain.d(),
            max: DENSE_CHAIN_MAX_D,
        });
    }
    let spec = ChainSpectrum::new(chain);
    let k = linalg::to_complex(&chain.k_op());
    Ok(spec.propagator(t, -1.0) * k * spec.propagator(t, 1.0))
}

/// Closed form of `K_t` for a closed algebra:
/// `K_0 + (cosh(sqrt(alpha) t) - 1)(K_0 + (gamma/alpha) 1) + i sinh(sqrt(alpha) t)/sqrt(alpha) B`
/// for `alpha != 0`, and `K_0 + iBt + (gamma/2) t^2 1` for `alpha = 0`.
pub fn super_heisenberg_k_closed(chain: &KrylovChain, alpha: f64, gamma: f64, t: f64) -> CMatrix {
    let d = chain.d();
    let k = linalg::to_complex(&chain.k_op());
    let b = linalg::to_complex(&chain.b_op());
    let id = CMatrix::identity(d, d);
    let i = Complex64::new(0.0, 1.0);
    if alpha == 0.0 {
        return &k + b.scale(t) * i + id.scale(0.5 * gamma * t * t);
    }
    // cosh(sqrt(alpha) t) and sinh(sqrt(alpha) t) / sqrt(alpha), real for both signs
    let (ch, sh) = if alpha < 0.0 {
        let w = (-alpha).sqrt();
        ((w * t).cos(), (w * t).sin() / w)
    } else {
        let w = alpha.sqrt();
        ((w * t).cosh(), (w * t).sinh() / w)
    };
    &k + (&k + id.scale(gamma / alpha)).scale(ch - 1.0) + b.map(|x| i * x).scale(sh)
}

/// Relative least-squares residual of `m` outside `span{1, K, B}`.
pub fn span_residual(chain: &KrylovChain, m: &CMatrix) -> f64 {
    let d = chain.d();
    let basis = [
        linalg::to_complex(&DMatrix::identity(d, d)),
        linalg::to_complex(&chain.k_op()),
        linalg::to_complex(&chain.b_op()),
    ];
    let (_, res) = least_squares(&basis, m);
    let scale = linalg::fro(m);
    if scale == 0.0 {
        res
    } else {
        res / scale
    }
}

/// Coefficients of the HS projection of `m` onto `span(basis)` and the norm
/// of what is left over.
fn least_squares(basis: &[CMatrix], m: &CMatrix) -> (Vec<Complex64>, f64) {
    let n = basis.len();
    let inner = |a: &CMatrix, b: &CMatrix| a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum::<Complex64>();
    let gram = CMatrix::from_fn(n, n, |i, j| inner(&basis[i], &basis[j]));
    let rhs = nalgebra::DVector::from_fn(n, |i, _| inner(&basis[i], m));
    let coef = gram.lu().solve(&rhs).unwrap_or_else(|| nalgebra::DVector::zeros(n));
    let mut fit = CMatrix::zeros(m.nrows(), m.ncols());
    for (c, b) in coef.iter().zip(basis) {
        fit += b.map(|x| x * c);
    }
    (coef.iter().copied().collect(), linalg::fro(&(m - fit)))
}

/// Dimension of the kernel of `S = [L, .]` restricted to `span{1, K, B}`,
/// together with the residual of expressing `S` on that span.
pub fn stationary_span_kernel_dim(chain: &KrylovChain) -> (usize, f64) {
    let d = chain.d();
    let l = linalg::to_complex(&chain.liouvillian());
    let basis = [
        linalg::to_complex(&DMatrix::identity(d, d)),
        linalg::to_complex(&chain.k_op()),
        linalg::to_complex(&chain.b_op()),
    ];
    let mut s = CMatrix::zeros(3, 3);
    let mut worst = 0.0_f64;
    for (j, x) in basis.iter().enumerate() {
        let img = &l * x - x * &l;
        let (coef, res) = least_squares(&basis, &img);
        worst = worst.max(res);
        for i in 0..3 {
            s[(i, j)] = coef[i];
        }
    }
    (linalg::null_space(&s, 1e-10).ncols(), worst)
}

/// `(V_K, V_Kbar) = (|B| / |K|, |B| / |K - (Tr K / D) 1|)`.
pub fn complexity_velocity(chain: &KrylovChain) -> (f64, f64) {
    let b = chain.b_norm_sq();
    let kb = chain.k_bar_norm_sq();
    let v_bar = if kb > 0.0 { (b / kb).sqrt() } else { 0.0 };
    ((b / chain.k_norm_sq().max(f64::MIN_POSITIVE)).sqrt(), v_bar)
}

/// `<K_0|K_t> = (|K|^2 + (gamma/alpha) Tr K) cos(sqrt|alpha| t) - (gamma/alpha) Tr K`.
pub fn complexity_autocorr(params: &AlgebraParams, t: f64) -> Result<Complex64> {
    if !(params.alpha < 0.0) {
        return Err(Error::NotApplicable(
            "the autocorrelation grows without bound for alpha >= 0".into(),
        ));
    }
    let d = params.d as f64;
    let k2 = d * (d - 1.0) * (2.0 * d - 1.0) / 6.0;
    let tr = d * (d - 1.0) / 2.0;
    let g = params.gamma / params.alpha;
    Ok(Complex64::new((k2 + g * tr) * (params.frequency() * t).cos() - g * tr, 0.0))
}

/// Geodesic reference `|X|^2 cos(V t)`.
pub fn geodesic_autocorr(norm_sq: f64, velocity: f64, t: f64) -> f64 {
    norm_sq * (velocity * t).cos()
}

/// Left- and right-hand side of `t >= arccos(...)/V`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OqslKPoint {
    pub t: f64,
    pub lhs: f64,
    pub rhs: f64,
}

impl OqslKPoint {
    pub fn gap(&self) -> f64 {
        self.lhs - self.rhs
    }
}

/// Plain and trace-subtracted speed limits for the complexity operator of
/// an SU(2) chain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OqslK {
    pub plain: OqslKPoint,
    pub subtracted: OqslKPoint,
}

/// Evaluates both speed limits at `t`, which must lie on the first arccos
/// branch `sqrt|alpha| t <= pi`.
///
/// The velocities and norms come from sums over the chain coefficients;
/// the autocorrelations from the closed forms. The arccos is evaluated from
/// the deficit `1 - ratio = 2 (1 - kappa) sin^2(w t / 2)` and its
/// complement, so the bound stays accurate at both ends of the branch.
pub fn oqsl_k(params: &AlgebraParams, t: f64) -> Result<OqslK> {
    let chain = su2_chain(params)?;
    oqsl_k_on_chain(params, &chain, t)
}

/// As [`oqsl_k`], reusing an already built chain.
pub fn oqsl_k_on_chain(params: &AlgebraParams, chain: &KrylovChain, t: f64) -> Result<OqslK> {
    let w = params.frequency();
    if !(t >= 0.0 && w * t <= std::f64::consts::PI * (1.0 + 1e-12)) {
        return Err(Error::NotApplicable(format!(
            "t = {t} lies outside the first branch [0, pi / sqrt|alpha|]"
        )));
    }
    let (v_k, v_bar) = complexity_velocity(chain);
    // stationary fraction of C(0): -(gamma/alpha) Tr K / |K|^2
    let kappa = -(params.gamma / params.alpha) * chain.trace_k() / chain.k_norm_sq();
    let (s, c) = (0.5 * w * t).sin_cos();
    let (s2, c2) = (s * s, c * c);
    let plain = linalg::angle_from_split(2.0 * (1.0 - kappa) * s2, 2.0 * (kappa + (1.0 - kappa) * c2)) / v_k;
    let subtracted = linalg::angle_from_split(2.0 * s2, 2.0 * c2) / v_bar;
    Ok(OqslK {
        plain: OqslKPoint { t, lhs: t, rhs: plain },
        subtracted: OqslKPoint {
            t,
            lhs: t,
            rhs: subtracted,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn su2(d: usize) -> (AlgebraParams, KrylovChain) {
        let p = AlgebraParams::su2(-1.0, d).unwrap();
        let c = su2_chain(&p).unwrap();
        (p, c)
    }

    #[test]
    fn trajectory_starts_at_zero() {
        let (_, c) = su2(4);
        let tr = complexity_trajectory(&c, &[0.0]);
        assert!(tr.k[0].abs() < 1e-15 && tr.dk_dt[0].abs() < 1e-15);
    }

    #[test]
    fn su2_saturates_dispersion_bound() {
        let (p, c) = su2(3);
        let ts: Vec<f64> = (0..50).map(|k| 0.13 * k as f64).collect();
        let tr = complexity_trajectory(&c, &ts);
        assert!(tr.max_abs_residual() < 1e-12);
        for (k, &t) in ts.iter().enumerate() {
            let (kc, dkc) = su2_complexity(&p, t);
            assert!((tr.k[k] - kc).abs() < 1e-12);
            assert!((tr.delta_k[k] - dkc).abs() < 1e-7);
        }
    }

    #[test]
    fn generic_chain_is_not_saturated() {
        let c = KrylovChain::new(vec![1.0, 0.3, 1.7, 0.8]).unwrap();
        let ts: Vec<f64> = (0..200).map(|k| 0.05 * k as f64).collect();
        let tr = complexity_trajectory(&c, &ts);
        assert!(tr.min_residual() > -1e-12);
        assert!(tr.residual.iter().any(|&r| r > 1e-3));
    }

    #[test]
    fn closure_fits_su2_parameters() {
        let (p, c) = su2(7);
        let r = algebra_closure_check(&c, None);
        assert!(r.max() < 1e-12, "{r:?}");
        assert!((r.alpha - p.alpha).abs() < 1e-12 && (r.gamma - p.gamma).abs() < 1e-12);
        let bad = KrylovChain::new((1..6).map(|n| n as f64).collect()).unwrap();
        assert!(algebra_closure_check(&bad, None).max() > 1e-3);
        let two = KrylovChain::new(vec![0.7]).unwrap();
        assert!(algebra_closure_check(&two, None).max() < 1e-14);
    }

    #[test]
    fn closed_form_matches_dense_evolution() {
        let (p, c) = su2(3);
        assert!((super_heisenberg_k(&c, 0.0).unwrap() - linalg::to_complex(&c.k_op())).norm() < 1e-14);
        for &t in &[0.0, 0.4, 1.9, 3.0] {
            let dense = super_heisenberg_k(&c, t).unwrap();
            let closed = super_heisenberg_k_closed(&c, p.alpha, p.gamma, t);
            assert!((&dense - &closed).norm() < 1e-12, "t = {t}");
            assert!(span_residual(&c, &dense) < 1e-12);
        }
    }

    #[test]
    fn identity_is_the_only_stationary_direction() {
        let (_, c) = su2(6);
        let (dim, res) = stationary_span_kernel_dim(&c);
        assert_eq!(dim, 1);
        assert!(res < 1e-12);
    }

    #[test]
    fn d3_velocities_and_autocorr() {
        let (p, c) = su2(3);
        let (vk, vbar) = complexity_velocity(&c);
        assert!((vk * vk - 0.4).abs() < 1e-15);
        assert!((vbar - 1.0).abs() < 1e-15);
        let spec = ChainSpectrum::new(&c);
        let ts = [0.0, 0.5, 2.0];
        let dense = spec.autocorrelation(&c.k_op(), &ts);
        for (k, &t) in ts.iter().enumerate() {
            let closed = complexity_autocorr(&p, t).unwrap();
            assert!((closed.re - (2.0 * t.cos() + 3.0)).abs() < 1e-14);
            assert!((dense[k] - closed).norm() < 1e-12);
        }
    }

    #[test]
    fn oqsl_k_plain_and_subtracted() {
        let (p, c) = su2(1000);
        let mut prev_gap = -1.0;
        for k in 0..100 {
            let t = std::f64::consts::PI * k as f64 / 100.0;
            let r = oqsl_k_on_chain(&p, &c, t).unwrap();
            assert!((r.subtracted.lhs - r.subtracted.rhs).abs() < 1e-12);
            assert!(r.plain.gap() > prev_gap);
            prev_gap = r.plain.gap();
        }
        assert!(oqsl_k(&p, 3.2).is_err());
    }
}
