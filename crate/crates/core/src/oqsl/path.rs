use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linalg;
use crate::opspace::{MetricP, Operator};
use crate::Complex64;

/// Relative drift of the seminorm tolerated along a path.
pub const NORM_PRESERVATION_TOL: f64 = 1e-8;

/// Two-point Gauss-Legendre nodes on `[0, 1]`.
const GAUSS_LO: f64 = 0.5 - 0.288_675_134_594_812_9;
const GAUSS_HI: f64 = 0.5 + 0.288_675_134_594_812_9;

/// Sampled evolution `A_t` under `dA/dt = i[H_t, A_t]`, together with the
/// generators and the metric used to measure it.
#[derive(Debug, Clone)]
pub struct FlowPath {
    times: Vec<f64>,
    states: Vec<Operator>,
    generators: Vec<Operator>,
    metric: Arc<MetricP>,
}

impl FlowPath {
    /// Validates grid monotonicity, dimensions and seminorm preservation.
    pub fn new(times: Vec<f64>, states: Vec<Operator>, generators: Vec<Operator>, metric: Arc<MetricP>) -> Result<Self> {
        if times.is_empty() {
            return Err(Error::EmptyPath);
        }
        for (len, what) in [(states.len(), "states"), (generators.len(), "generators")] {
            if len != times.len() {
                return Err(Error::InvalidArgument(format!(
                    "{what} has {len} entries for {} times",
                    times.len()
                )));
            }
        }
        if let Some(k) = times.windows(2).position(|w| !(w[1] > w[0])) {
            return Err(Error::NonIncreasingTimes(k + 1));
        }
        let dim = metric.dim();
        for op in states.iter().chain(&generators) {
            if op.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: op.dim(),
                });
            }
        }
        let n0 = metric.seminorm(&states[0])?;
        if n0 == 0.0 {
            return Err(Error::ZeroOperator);
        }
        for (index, s) in states.iter().enumerate().skip(1) {
            let drift = (metric.seminorm(s)? - n0).abs() / n0;
            if drift > NORM_PRESERVATION_TOL {
                return Err(Error::NormNotPreserved { index, drift });
            }
        }
        Ok(Self {
            times,
            states,
            generators,
            metric,
        })
    }

    /// Exact evolution under a constant Hermitian `h`:
    /// `A_t = exp(iHt) A exp(-iHt)`.
    pub fn constant(metric: Arc<MetricP>, h: &Operator, a: &Operator, times: Vec<f64>) -> Result<Self> {
        h.require_hermitian()?;
        let eig = linalg::eigh(h.matrix());
        let t0 = times.first().copied().unwrap_or(0.0);
        let states = times
            .iter()
            .map(|&t| {
                let mut u = eig.vectors.clone();
                for (k, &e) in eig.values.iter().enumerate() {
                    let phase = Complex64::from_polar(1.0, e * (t - t0));
                    for r in 0..u.nrows() {
                        u[(r, k)] *= phase;
                    }
                }
                a.conjugate_by(&(&u * eig.vectors.adjoint()))
            })
            .collect();
        let generators = vec![h.clone(); times.len()];
        Self::new(times, states, generators, metric)
    }

    /// Evolution `dA/dt = i[H(t), A]` under a time-dependent `h(t)`,
    /// propagated with `substeps` fourth-order Magnus steps per grid
    /// interval. Each step is exactly unitary; the local error is fifth
    /// order in the substep.
    pub fn from_schedule<F>(metric: Arc<MetricP>, a: &Operator, times: Vec<f64>, substeps: usize, h: F) -> Result<Self>
    where
        F: Fn(f64) -> Operator,
    {
        if times.is_empty() {
            return Err(Error::EmptyPath);
        }
        let substeps = substeps.max(1);
        let mut states = Vec::with_capacity(times.len());
        let mut generators = Vec::with_capacity(times.len());
        let mut cur = a.clone();
        for (k, &t) in times.iter().enumerate() {
            if k > 0 {
                let t_prev = times[k - 1];
                let dt = (t - t_prev) / substeps as f64;
                for j in 0..substeps {
                    let t0 = t_prev + j as f64 * dt;
                    let h1 = h(t0 + GAUSS_LO * dt);
                    let h2 = h(t0 + GAUSS_HI * dt);
                    h1.require_hermitian()?;
                    h2.require_hermitian()?;
                    // (H1 + H2)/2 + i (sqrt3 dt / 12) [H2, H1], Hermitian
                    let c = h2.commutator(&h1)?;
                    let eff = &(&h1 + &h2).scale_real(0.5) + &c.scale(Complex64::new(0.0, 3f64.sqrt() * dt / 12.0));
                    cur = cur.conjugate_by(&linalg::expm_i_hermitian(eff.hermitian_part().matrix(), dt));
                }
            }
            states.push(cur.clone());
            let g = h(t);
            g.require_hermitian()?;
            generators.push(g);
        }
        Self::new(times, states, generators, metric)
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn states(&self) -> &[Operator] {
        &self.states
    }

    pub fn generators(&self) -> &[Operator] {
        &self.generators
    }

    pub fn metric(&self) -> &MetricP {
        &self.metric
    }

    pub fn metric_arc(&self) -> &Arc<MetricP> {
        &self.metric
    }

    /// Elapsed time `tau = t_K - t_0`.
    pub fn duration(&self) -> f64 {
        self.times[self.times.len() - 1] - self.times[0]
    }

    /// Whether every generator equals the first one.
    pub fn has_constant_generator(&self) -> bool {
        let g0 = self.generators[0].matrix();
        self.generators.iter().all(|g| g.matrix() == g0)
    }
}

/// `C(t_k) = <A|A_{t_k}>` along the path.
pub fn autocorrelation(path: &FlowPath) -> Result<Vec<Complex64>> {
    let m = path.metric();
    let a0 = &path.states[0];
    let c: Vec<Complex64> = path.states.iter().map(|s| m.inner(a0, s)).collect::<Result<_>>()?;
    if c[0].re <= 0.0 {
        return Err(Error::ZeroOperator);
    }
    Ok(c)
}

/// Instantaneous speeds `||[H_t, A_t]||` at the grid points.
pub fn speeds(path: &FlowPath) -> Result<Vec<f64>> {
    let m = path.metric();
    path.states
        .iter()
        .zip(&path.generators)
        .map(|(a, h)| m.seminorm(&h.commutator(a)?))
        .collect()
}

/// Time-averaged speed `(1/tau) int_0^tau ||L_t A_t|| dt`.
///
/// The integral uses the composite trapezoidal rule on the path grid, so
/// its error is `O(dt^2)` times the second derivative of the speed. For a
/// constant generator with a conserved metric the speed is constant and
/// the rule is exact. A one-point path returns the instantaneous speed.
pub fn avg_velocity(path: &FlowPath) -> Result<f64> {
    if path.is_empty() {
        return Err(Error::EmptyPath);
    }
    let s = speeds(path)?;
    if path.len() == 1 {
        return Ok(s[0]);
    }
    Ok(linalg::trapezoid(&path.times, &s) / path.duration())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hs2() -> Arc<MetricP> {
        Arc::new(MetricP::hilbert_schmidt(2))
    }

    #[test]
    fn z_x_autocorrelation_and_velocity() {
        let times: Vec<f64> = (0..=20).map(|k| k as f64 * 0.05).collect();
        let p = FlowPath::constant(hs2(), &Operator::pauli_z(), &Operator::pauli_x(), times.clone()).unwrap();
        let c = autocorrelation(&p).unwrap();
        for (t, ct) in times.iter().zip(&c) {
            assert!((ct.re - 2.0 * (2.0 * t).cos()).abs() < 1e-13);
            assert!(ct.im.abs() < 1e-13);
        }
        assert!((avg_velocity(&p).unwrap() - 2.0 * 2f64.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn schedule_matches_constant_generator() {
        let times: Vec<f64> = (0..=10).map(|k| k as f64 * 0.1).collect();
        let h = Operator::pauli_z();
        let a = Operator::pauli_x();
        let exact = FlowPath::constant(hs2(), &h, &a, times.clone()).unwrap();
        let sched = FlowPath::from_schedule(hs2(), &a, times, 3, |_| h.clone()).unwrap();
        for (x, y) in exact.states().iter().zip(sched.states()) {
            assert!((x - y).hs_norm() < 1e-13);
        }
    }

    #[test]
    fn schedule_is_fourth_order() {
        let h = |t: f64| &Operator::pauli_z().scale_real(t.cos()) + &Operator::pauli_x().scale_real(1.0 + t.sin());
        let a = Operator::pauli_y();
        let end = |n| {
            let p = FlowPath::from_schedule(hs2(), &a, vec![0.0, 2.0], n, h).unwrap();
            p.states()[1].clone()
        };
        let reference = end(512);
        let e1 = (&end(8) - &reference).hs_norm();
        let e2 = (&end(16) - &reference).hs_norm();
        let order = (e1 / e2).log2();
        assert!((order - 4.0).abs() < 0.3, "observed order {order}");
    }

    #[test]
    fn rejects_bad_paths() {
        let a = Operator::pauli_x();
        let h = Operator::pauli_z();
        assert!(matches!(
            FlowPath::new(vec![0.0, 0.0], vec![a.clone(); 2], vec![h.clone(); 2], hs2()),
            Err(Error::NonIncreasingTimes(1))
        ));
        assert!(matches!(
            FlowPath::new(vec![0.0, 1.0], vec![a.clone(), a.scale_real(2.0)], vec![h.clone(); 2], hs2()),
            Err(Error::NormNotPreserved { index: 1, .. })
        ));
        assert!(matches!(
            FlowPath::new(vec![0.0], vec![Operator::zeros(2)], vec![h], hs2()),
            Err(Error::ZeroOperator)
        ));
    }

    #[test]
    fn commuting_operator_has_zero_velocity() {
        let p = FlowPath::constant(hs2(), &Operator::pauli_z(), &Operator::pauli_z(), vec![0.0, 0.5, 1.0]).unwrap();
        assert_eq!(avg_velocity(&p).unwrap(), 0.0);
    }
}
