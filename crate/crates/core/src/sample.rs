//! Seeded random operators, metrics and Lanczos chains.
//!
//! All samplers draw from a caller-supplied [`RngCore`]; use
//! [`rng_from_seed`] for the crate-wide ChaCha8 stream.

use std::sync::Arc;

use nalgebra::QR;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::error::{Error, Result};
use crate::flows::random::uniform_pm1;
use crate::krylov::KrylovChain;
use crate::linalg::CMatrix;
use crate::opspace::{gibbs_metric, kubo_metric, MetricP, Operator, SuperOperator};
use crate::oqsl::FlowPath;
use crate::Complex64;

pub type SeededRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn complex_pm1(rng: &mut impl RngCore) -> Complex64 {
    let re = uniform_pm1(rng);
    Complex64::new(re, uniform_pm1(rng))
}

/// Matrix with i.i.d. entries, real and imaginary parts uniform on `[-1, 1)`.
pub fn random_matrix(rows: usize, cols: usize, rng: &mut impl RngCore) -> CMatrix {
    let entries: Vec<Complex64> = (0..rows * cols).map(|_| complex_pm1(rng)).collect();
    CMatrix::from_row_slice(rows, cols, &entries)
}

pub fn random_operator(dim: usize, rng: &mut impl RngCore) -> Operator {
    Operator::new(random_matrix(dim, dim, rng)).expect("square")
}

/// `(M + M^dagger) / 2` for a random `M`.
pub fn random_hermitian(dim: usize, rng: &mut impl RngCore) -> Operator {
    random_operator(dim, rng).hermitian_part()
}

/// Unitary from the QR factor of a random matrix.
pub fn random_unitary(dim: usize, rng: &mut impl RngCore) -> CMatrix {
    QR::new(random_matrix(dim, dim, rng)).q()
}

/// `M M^dagger / Tr(M M^dagger)` with `M` of shape `dim x rank`.
pub fn random_density(dim: usize, rank: usize, rng: &mut impl RngCore) -> Operator {
    let m = random_matrix(dim, rank.max(1), rng);
    let rho = &m * m.adjoint();
    let tr = rho.trace().re;
    Operator::new(rho.unscale(tr)).expect("square")
}

/// Positive semi-definite superoperator `M M^dagger` on vectorized
/// operators, with `M` of shape `dim^2 x rank`.
pub fn random_psd_superop(dim: usize, rank: usize, rng: &mut impl RngCore) -> Result<SuperOperator> {
    let n = dim * dim;
    let m = random_matrix(n, rank.clamp(1, n), rng);
    SuperOperator::from_dense(dim, &m * m.adjoint())
}

/// Chain of length `d` with `b_n` uniform on `[lo, hi)`.
pub fn random_chain(d: usize, lo: f64, hi: f64, rng: &mut impl RngCore) -> Result<KrylovChain> {
    let b = (1..d.max(1))
        .map(|_| lo + (hi - lo) * 0.5 * (uniform_pm1(rng) + 1.0))
        .collect();
    KrylovChain::new(b)
}

/// Hamiltonian with a random nondegenerate spectrum and an operator whose
/// moving part sits in one `+-w` pair of Liouvillian eigenspaces: in the
/// energy basis `A` is diagonal plus a single coupling `c|i><j| + h.c.`.
pub fn two_gap_pair(dim: usize, rng: &mut impl RngCore) -> (Operator, Operator) {
    let dim = dim.max(2);
    // spread energies so that no other gap coincides with E_i - E_j
    let energies: Vec<f64> = (0..dim)
        .map(|k| (k * k) as f64 + 0.1 * uniform_pm1(rng))
        .collect();
    let u = random_unitary(dim, rng);
    let mut a = CMatrix::zeros(dim, dim);
    for k in 0..dim {
        a[(k, k)] = Complex64::new(uniform_pm1(rng), 0.0);
    }
    let i = (rng.next_u64() % dim as u64) as usize;
    let j = (i + 1 + (rng.next_u64() % (dim as u64 - 1)) as usize) % dim;
    let c = complex_pm1(rng) + Complex64::new(1.5, 0.0);
    a[(i, j)] = c;
    a[(j, i)] = c.conj();
    let h = Operator::from_diagonal(&energies).conjugate_by(&u);
    let a = Operator::new(a).expect("square").conjugate_by(&u);
    (h, a)
}

/// Metric family of a random path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MetricKind {
    HilbertSchmidt,
    Gibbs { beta: f64 },
    /// Kubo metric; the initial operator is centered before evolution.
    Kubo { beta: f64 },
}

/// Time dependence of the Hamiltonian of a random path.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Schedule {
    /// `H(t) = H_0`, evolved exactly.
    Constant,
    /// `H(t) = (1 + t / 2) H_0`, evolved exactly. Speeds are linear in `t`,
    /// so the trapezoidal velocity integral is exact as well.
    Commuting,
    /// `H(t) = cos(t) H_0 + sin(t) H_1`. Hilbert-Schmidt metric only, since
    /// thermal metrics do not commute with `[H(t), .]` for all `t`.
    NonCommuting,
}

/// Metric built from `h` for the given family, together with the operator
/// the path should start from.
pub fn metric_for(kind: MetricKind, h: &Operator, a: &Operator) -> Result<(MetricP, Operator)> {
    match kind {
        MetricKind::HilbertSchmidt => Ok((MetricP::hilbert_schmidt(h.dim()), a.clone())),
        MetricKind::Gibbs { beta } => Ok((gibbs_metric(h, beta)?, a.clone())),
        MetricKind::Kubo { beta } => {
            let k = kubo_metric(h, beta)?;
            let centered = k.center(a)?;
            Ok((k.into_metric(), centered))
        }
    }
}

/// Random Hermitian `H_0`, random Hermitian `A` and the path of `A` on
/// `samples + 1` equally spaced times in `[0, tau]`.
pub fn random_path(
    dim: usize,
    metric: MetricKind,
    schedule: Schedule,
    tau: f64,
    samples: usize,
    rng: &mut impl RngCore,
) -> Result<FlowPath> {
    if schedule == Schedule::NonCommuting && metric != MetricKind::HilbertSchmidt {
        return Err(Error::InvalidArgument(
            "non-commuting schedules need the Hilbert-Schmidt metric".into(),
        ));
    }
    let h0 = random_hermitian(dim, rng);
    let a = random_hermitian(dim, rng);
    let h1 = random_hermitian(dim, rng);
    let (p, a) = metric_for(metric, &h0, &a)?;
    let p = Arc::new(p);
    let samples = samples.max(1);
    let times: Vec<f64> = (0..=samples).map(|k| tau * k as f64 / samples as f64).collect();
    match schedule {
        Schedule::Constant => FlowPath::constant(p, &h0, &a, times),
        Schedule::Commuting => {
            // phase int_0^t (1 + s/2) ds
            let phases: Vec<f64> = times.iter().map(|t| t + 0.25 * t * t).collect();
            let states = FlowPath::constant(p.clone(), &h0, &a, phases)?.states().to_vec();
            let generators = times.iter().map(|t| h0.scale_real(1.0 + 0.5 * t)).collect();
            FlowPath::new(times, states, generators, p)
        }
        Schedule::NonCommuting => FlowPath::from_schedule(p, &a, times, 4, |t| {
            &h0.scale_real(t.cos()) + &h1.scale_real(t.sin())
        }),
    }
}
