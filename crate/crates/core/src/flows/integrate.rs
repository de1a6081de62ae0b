use nalgebra::{ComplexField, DMatrix};
use num_complex::Complex64;

use super::generators::{toda_eta, wegner_eta, GeneratorKind};
use super::tridiagonal::{toda_rhs_into, TridiagonalHamiltonian};
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use crate::ode::{self, OdeOptions, OdeStats};
use crate::opspace::Operator;

/// Initial Hamiltonian of a flow.
#[derive(Debug, Clone, PartialEq)]
pub enum FlowInput {
    Dense(Operator),
    Tridiagonal(TridiagonalHamiltonian),
}

impl From<Operator> for FlowInput {
    fn from(h: Operator) -> Self {
        FlowInput::Dense(h)
    }
}

impl From<TridiagonalHamiltonian> for FlowInput {
    fn from(t: TridiagonalHamiltonian) -> Self {
        FlowInput::Tridiagonal(t)
    }
}

impl FlowInput {
    pub fn to_operator(&self) -> Operator {
        match self {
            FlowInput::Dense(h) => h.clone(),
            FlowInput::Tridiagonal(t) => t.to_operator(),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            FlowInput::Dense(h) => h.dim(),
            FlowInput::Tridiagonal(t) => t.n(),
        }
    }
}

/// Output sampling of a flow.
#[derive(Debug, Clone, PartialEq)]
pub enum SampleGrid {
    /// `n` equally spaced points on `[0, l_max]`.
    Uniform(usize),
    /// `0` followed by `n - 1` geometrically spaced points on `[l_min, l_max]`.
    Log { n: usize, l_min: f64 },
    /// Explicit increasing grid starting at 0; `l_max` is ignored.
    Explicit(Vec<f64>),
}

impl SampleGrid {
    pub fn points(&self, l_max: f64) -> Result<Vec<f64>> {
        let grid = match self {
            SampleGrid::Uniform(n) => {
                let n = (*n).max(2);
                (0..n).map(|k| l_max * k as f64 / (n - 1) as f64).collect()
            }
            SampleGrid::Log { n, l_min } => {
                let n = (*n).max(3);
                if !(*l_min > 0.0 && *l_min < l_max) {
                    return Err(Error::InvalidArgument(format!("log grid needs 0 < l_min < l_max, got {l_min}")));
                }
                let r = (l_max / l_min).ln();
                let mut g = vec![0.0];
                g.extend((0..n - 1).map(|k| l_min * (r * k as f64 / (n - 2) as f64).exp()));
                *g.last_mut().unwrap() = l_max;
                g
            }
            SampleGrid::Explicit(g) => g.clone(),
        };
        if grid.first() != Some(&0.0) {
            return Err(Error::InvalidArgument("flow grid must start at l = 0".into()));
        }
        if let Some(k) = grid.windows(2).position(|w| !(w[1] > w[0])) {
            return Err(Error::NonIncreasingTimes(k + 1));
        }
        Ok(grid)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowOptions {
    pub ode: OdeOptions,
    pub samples: SampleGrid,
    /// Relative tolerance of the isospectrality and norm invariants.
    pub invariant_tol: f64,
    /// Runs abort once an invariant drifts beyond `abort_factor * invariant_tol`.
    pub abort_factor: f64,
}

impl Default for FlowOptions {
    fn default() -> Self {
        Self {
            ode: OdeOptions::default(),
            samples: SampleGrid::Uniform(201),
            invariant_tol: 1e-8,
            abort_factor: 100.0,
        }
    }
}

/// Sampled solution of `dH/dl = [eta, H]` with per-point diagnostics.
#[derive(Debug, Clone)]
pub struct FlowTrajectory {
    pub kind: GeneratorKind,
    pub grid: Vec<f64>,
    pub hamiltonians: Vec<Operator>,
    /// Band coordinates when the flow ran in tridiagonal form.
    pub tridiagonal: Option<Vec<TridiagonalHamiltonian>>,
    /// `arccos(Tr(H(0) H(l)) / ||H(0)||^2)`.
    pub theta: Vec<f64>,
    /// `sum_{m != n} |H_mn|^2`.
    pub offdiag_sq: Vec<f64>,
    /// `int_0^l ||[eta, H]|| ds / ||H||`.
    pub velocity_integral: Vec<f64>,
    /// `||H(0)||_HS`.
    pub norm: f64,
    /// Sorted spectrum of `H(0)`.
    pub spectrum: Vec<f64>,
    pub max_spectrum_drift: f64,
    pub max_norm_drift: f64,
    /// The generator vanished while off-diagonal weight remained.
    pub stalled: bool,
    pub stats: OdeStats,
}

impl FlowTrajectory {
    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    /// Partial traces `sum_{n <= k} H_nn(l)` per sample.
    pub fn partial_traces(&self) -> Vec<Vec<f64>> {
        self.hamiltonians
            .iter()
            .map(|h| {
                (0..h.dim())
                    .scan(0.0, |acc, k| {
                        *acc += h.get(k, k).re;
                        Some(*acc)
                    })
                    .collect()
            })
            .collect()
    }
}

/// Operator angle `arccos(Tr(H0 Hl) / (||H0|| ||Hl||))`, evaluated as the
/// chord angle `2 asin(||Hl/||Hl|| - H0/||H0|| || / 2)` so small angles keep
/// full relative precision. Equals `arccos(Tr(H0 Hl) / ||H0||^2)` on
/// norm-preserving flows.
pub fn operator_angle(h0: &Operator, hl: &Operator) -> f64 {
    let (n0, nl) = (h0.hs_norm(), hl.hs_norm());
    if n0 == 0.0 || nl == 0.0 {
        return 0.0;
    }
    let chord = (&hl.scale_real(1.0 / nl) - &h0.scale_real(1.0 / n0)).hs_norm();
    2.0 * (0.5 * chord).min(1.0).asin()
}

/// `40 / gap^2` for the smallest nonzero eigenvalue gap of `h`.
pub fn default_l_max(h: &FlowInput) -> f64 {
    let ev = match h {
        FlowInput::Dense(op) => linalg::eigh(op.matrix()).values,
        FlowInput::Tridiagonal(t) => t.eigenvalues(),
    };
    let spread = ev.last().unwrap() - ev.first().unwrap();
    let gap = ev
        .windows(2)
        .map(|w| w[1] - w[0])
        .filter(|&g| g > 1e-10 * spread)
        .fold(f64::INFINITY, f64::min);
    if gap.is_finite() {
        40.0 / (gap * gap)
    } else {
        1.0
    }
}

fn eta_of(kind: &GeneratorKind, l: f64, h: &Operator) -> Operator {
    match kind {
        GeneratorKind::Wegner => Operator::new(wegner_eta(h.matrix())).expect("square"),
        GeneratorKind::Toda => Operator::new(toda_eta(h.matrix())).expect("square"),
        GeneratorKind::Custom(f) => f(l, h),
    }
}

/// Scalar types the dense flow can run in.
trait FlowScalar: ComplexField<RealField = f64> + Copy {
    const WIDTH: usize;
    fn pack(self, out: &mut [f64]);
    fn unpack(s: &[f64]) -> Self;
    fn to_c64(self) -> Complex64;
    fn from_c64(z: Complex64) -> Self;
}

impl FlowScalar for f64 {
    const WIDTH: usize = 1;
    fn pack(self, out: &mut [f64]) {
        out[0] = self;
    }
    fn unpack(s: &[f64]) -> Self {
        s[0]
    }
    fn to_c64(self) -> Complex64 {
        Complex64::new(self, 0.0)
    }
    fn from_c64(z: Complex64) -> Self {
        z.re
    }
}

impl FlowScalar for Complex64 {
    const WIDTH: usize = 2;
    fn pack(self, out: &mut [f64]) {
        out[0] = self.re;
        out[1] = self.im;
    }
    fn unpack(s: &[f64]) -> Self {
        Complex64::new(s[0], s[1])
    }
    fn to_c64(self) -> Complex64 {
        self
    }
    fn from_c64(z: Complex64) -> Self {
        z
    }
}

fn unpack_matrix<T: FlowScalar>(y: &[f64], n: usize) -> DMatrix<T> {
    DMatrix::from_fn(n, n, |i, j| T::unpack(&y[(i * n + j) * T::WIDTH..]))
}

fn pack_matrix<T: FlowScalar>(m: &DMatrix<T>, out: &mut [f64]) {
    let n = m.nrows();
    for i in 0..n {
        for j in 0..n {
            m[(i, j)].pack(&mut out[(i * n + j) * T::WIDTH..]);
        }
    }
}

fn to_operator<T: FlowScalar>(m: &DMatrix<T>) -> Operator {
    Operator::new(CMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)].to_c64())).expect("square")
}

fn norm_check(norm_sq: f64, norm0_sq: f64, limit: f64, l: f64) -> Result<f64> {
    let drift = (norm_sq.sqrt() - norm0_sq.sqrt()).abs() / norm0_sq.sqrt();
    if drift > limit {
        return Err(Error::InvariantViolation {
            name: "norm conservation",
            drift,
            limit,
            l,
        });
    }
    Ok(drift)
}

struct RawPath {
    hamiltonians: Vec<Operator>,
    tridiagonal: Option<Vec<TridiagonalHamiltonian>>,
    speed_integral: Vec<f64>,
    max_norm_drift: f64,
    stats: OdeStats,
}

const FLUSH_BELOW: f64 = 1e-150;

fn run_dense<T: FlowScalar>(
    h0: &Operator,
    kind: &GeneratorKind,
    grid: &[f64],
    opts: &FlowOptions,
) -> Result<RawPath> {
    let n = h0.dim();
    let len = n * n * T::WIDTH;
    let mut y0 = vec![0.0; len + 1];
    let m0: DMatrix<T> = DMatrix::from_fn(n, n, |i, j| T::from_c64(h0.get(i, j)));
    pack_matrix(&m0, &mut y0[..len]);
    let norm0_sq = h0.hs_norm().powi(2);
    let limit = opts.abort_factor * opts.invariant_tol;
    let mut max_norm_drift = 0.0_f64;

    let rhs = |l: f64, y: &[f64], dy: &mut [f64]| {
        let h: DMatrix<T> = unpack_matrix(&y[..len], n);
        let eta: DMatrix<T> = match kind {
            GeneratorKind::Wegner => wegner_eta(&h),
            GeneratorKind::Toda => toda_eta(&h),
            GeneratorKind::Custom(f) => {
                let e = f(l, &to_operator(&h));
                DMatrix::from_fn(n, n, |i, j| T::from_c64(e.get(i, j)))
            }
        };
        let dh = &eta * &h - &h * &eta;
        pack_matrix(&dh, &mut dy[..len]);
        dy[len] = dh.iter().map(|z| z.modulus_squared()).sum::<f64>().sqrt();
    };
    let hook = |l: f64, y: &mut [f64]| -> Result<()> {
        // decayed couplings would otherwise drift into subnormal range
        for x in y[..len].iter_mut() {
            if x.abs() < FLUSH_BELOW {
                *x = 0.0;
            }
        }
        let h: DMatrix<T> = unpack_matrix(&y[..len], n);
        let sym = (&h + h.adjoint()).scale(0.5);
        pack_matrix(&sym, &mut y[..len]);
        let ns: f64 = sym.iter().map(|z| z.modulus_squared()).sum();
        max_norm_drift = max_norm_drift.max(norm_check(ns, norm0_sq, limit, l)?);
        Ok(())
    };
    let (ys, stats) = ode::integrate(rhs, y0, grid, &opts.ode, hook)?;
    let hamiltonians = ys.iter().map(|y| to_operator(&unpack_matrix::<T>(&y[..len], n))).collect();
    let speed_integral = ys.iter().map(|y| y[len]).collect();
    Ok(RawPath {
        hamiltonians,
        tridiagonal: None,
        speed_integral,
        max_norm_drift,
        stats,
    })
}

fn run_toda_band(t0: &TridiagonalHamiltonian, grid: &[f64], opts: &FlowOptions) -> Result<RawPath> {
    let n = t0.n();
    let mut y0: Vec<f64> = t0.diag().to_vec();
    y0.extend_from_slice(t0.offdiag());
    y0.push(0.0);
    let norm0_sq = t0.norm_sq();
    let limit = opts.abort_factor * opts.invariant_tol;
    let mut max_norm_drift = 0.0_f64;

    let rhs = |_: f64, y: &[f64], dy: &mut [f64]| {
        let (h, rest) = y.split_at(n);
        let v = &rest[..n - 1];
        let (dh, drest) = dy.split_at_mut(n);
        let (dv, ds) = drest.split_at_mut(n - 1);
        toda_rhs_into(h, v, dh, dv);
        let sq = dh.iter().map(|x| x * x).sum::<f64>() + 2.0 * dv.iter().map(|x| x * x).sum::<f64>();
        ds[0] = sq.sqrt();
    };
    let hook = |l: f64, y: &mut [f64]| -> Result<()> {
        let ns = y[..n].iter().map(|x| x * x).sum::<f64>() + 2.0 * y[n..2 * n - 1].iter().map(|x| x * x).sum::<f64>();
        max_norm_drift = max_norm_drift.max(norm_check(ns, norm0_sq, limit, l)?);
        Ok(())
    };
    let (ys, stats) = ode::integrate(rhs, y0, grid, &opts.ode, hook)?;
    let bands: Vec<TridiagonalHamiltonian> = ys
        .iter()
        .map(|y| TridiagonalHamiltonian::new(y[..n].to_vec(), y[n..2 * n - 1].to_vec()))
        .collect::<Result<_>>()?;
    Ok(RawPath {
        hamiltonians: bands.iter().map(|t| t.to_operator()).collect(),
        tridiagonal: Some(bands),
        speed_integral: ys.iter().map(|y| y[2 * n - 1]).collect(),
        max_norm_drift,
        stats,
    })
}

fn is_real(op: &Operator) -> bool {
    op.matrix().iter().all(|z| z.im == 0.0)
}

/// Integrates `dH/dl = [eta(l), H(l)]` from `h0` up to `l_max`.
///
/// Tridiagonal input under the Toda generator runs in band coordinates, so
/// the band structure is exact. Everything else runs on the dense matrix,
/// in real arithmetic when the input is real and the generator is Wegner or
/// Toda, and the state is re-symmetrized after every accepted step.
pub fn integrate_flow(
    h0: impl Into<FlowInput>,
    kind: &GeneratorKind,
    l_max: f64,
    opts: &FlowOptions,
) -> Result<FlowTrajectory> {
    let input = h0.into();
    if !matches!(opts.samples, SampleGrid::Explicit(_)) && !(l_max > 0.0 && l_max.is_finite()) {
        return Err(Error::InvalidArgument(format!("l_max must be positive, got {l_max}")));
    }
    let grid = opts.samples.points(l_max)?;
    let h_op = input.to_operator();
    h_op.require_hermitian()?;
    let norm = h_op.hs_norm();
    if norm == 0.0 {
        return Err(Error::ZeroOperator);
    }

    let raw = match (&input, kind) {
        (FlowInput::Tridiagonal(t), GeneratorKind::Toda) if t.n() >= 2 => run_toda_band(t, &grid, opts)?,
        (_, GeneratorKind::Custom(_)) => run_dense::<Complex64>(&h_op, kind, &grid, opts)?,
        _ if is_real(&h_op) => run_dense::<f64>(&h_op, kind, &grid, opts)?,
        _ => run_dense::<Complex64>(&h_op, kind, &grid, opts)?,
    };

    let spectrum = linalg::eigh(h_op.matrix()).values;
    let scale = spectrum.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    let limit = opts.abort_factor * opts.invariant_tol;
    let mut max_spectrum_drift = 0.0_f64;
    let mut theta = Vec::with_capacity(grid.len());
    let mut offdiag_sq = Vec::with_capacity(grid.len());
    for (k, h) in raw.hamiltonians.iter().enumerate() {
        let ev = match &raw.tridiagonal {
            Some(b) => b[k].eigenvalues(),
            None => linalg::eigh(h.matrix()).values,
        };
        let drift = ev
            .iter()
            .zip(&spectrum)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
            / scale;
        if drift > limit {
            return Err(Error::InvariantViolation {
                name: "isospectrality",
                drift,
                limit,
                l: grid[k],
            });
        }
        max_spectrum_drift = max_spectrum_drift.max(drift);
        theta.push(operator_angle(&h_op, h));
        offdiag_sq.push(h.off_diagonal_sq());
    }

    let last = raw.hamiltonians.last().unwrap();
    let eta_end = eta_of(kind, *grid.last().unwrap(), last).hs_norm();
    let off_end = offdiag_sq.last().unwrap().sqrt();
    let stalled = off_end > 1e-10 * norm && eta_end <= 1e-10 * norm * off_end;

    Ok(FlowTrajectory {
        kind: kind.clone(),
        velocity_integral: raw.speed_integral.iter().map(|s| s / norm).collect(),
        grid,
        hamiltonians: raw.hamiltonians,
        tridiagonal: raw.tridiagonal,
        theta,
        offdiag_sq,
        norm,
        spectrum,
        max_spectrum_drift,
        max_norm_drift: raw.max_norm_drift,
        stalled,
        stats: raw.stats,
    })
}
