//! Adaptive Dormand-Prince 5(4) integrator for flat real state vectors.
//!
//! Steps are clamped so that every requested output point is hit exactly;
//! no dense output interpolation is involved. A post-step hook may project
//! the state (e.g. re-symmetrize a matrix) or abort the run.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub max_step: f64,
    pub initial_step: Option<f64>,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-9,
            atol: 1e-12,
            max_step: f64::INFINITY,
            initial_step: None,
            max_steps: 10_000_000,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OdeStats {
    pub accepted: usize,
    pub rejected: usize,
    pub rhs_evals: usize,
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
/// Difference between the 5th and embedded 4th order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 10.0;

fn scaled_rms(v: &[f64], y: &[f64], y2: &[f64], opts: &OdeOptions) -> f64 {
    if v.is_empty() {
        return 0.0;
    }
    let s: f64 = v
        .iter()
        .zip(y.iter().zip(y2))
        .map(|(e, (a, b))| {
            let sc = opts.atol + opts.rtol * a.abs().max(b.abs());
            (e / sc).powi(2)
        })
        .sum();
    (s / v.len() as f64).sqrt()
}

/// Integrates `y' = f(t, y)` and returns the state at every point of `grid`
/// (the first entry is `y0` itself). The grid must be strictly monotone in
/// either direction.
pub fn integrate<F, H>(
    mut f: F,
    y0: Vec<f64>,
    grid: &[f64],
    opts: &OdeOptions,
    mut hook: H,
) -> Result<(Vec<Vec<f64>>, OdeStats)>
where
    F: FnMut(f64, &[f64], &mut [f64]),
    H: FnMut(f64, &mut [f64]) -> Result<()>,
{
    if grid.is_empty() {
        return Err(Error::InvalidArgument("empty output grid".into()));
    }
    let dir = if grid.len() > 1 && grid[grid.len() - 1] < grid[0] { -1.0 } else { 1.0 };
    for (k, w) in grid.windows(2).enumerate() {
        if !((w[1] - w[0]) * dir > 0.0) {
            return Err(Error::NonIncreasingTimes(k + 1));
        }
    }
    let n = y0.len();
    let mut stats = OdeStats::default();
    let mut out = Vec::with_capacity(grid.len());
    out.push(y0.clone());
    if grid.len() == 1 {
        return Ok((out, stats));
    }

    let mut t = grid[0];
    let mut y = y0;
    let mut k: Vec<Vec<f64>> = vec![vec![0.0; n]; 7];
    let mut ytmp = vec![0.0; n];
    let mut ynew = vec![0.0; n];
    let mut err = vec![0.0; n];

    f(t, &y, &mut k[0]);
    stats.rhs_evals += 1;

    let mut h = match opts.initial_step {
        Some(h0) => h0.abs(),
        None => {
            let d0 = scaled_rms(&y, &y, &y, opts);
            let d1 = scaled_rms(&k[0], &y, &y, opts);
            let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
            for i in 0..n {
                ytmp[i] = y[i] + dir * h0 * k[0][i];
            }
            f(t + dir * h0, &ytmp, &mut k[1]);
            stats.rhs_evals += 1;
            let diff: Vec<f64> = (0..n).map(|i| (k[1][i] - k[0][i]) / h0).collect();
            let d2 = scaled_rms(&diff, &y, &y, opts);
            let h1 = if d1.max(d2) <= 1e-15 {
                (h0 * 1e-3).max(1e-6)
            } else {
                (0.01 / d1.max(d2)).powf(0.2)
            };
            (100.0 * h0).min(h1)
        }
    }
    .min(opts.max_step);

    let mut rejected_last = false;
    for &target in &grid[1..] {
        while (target - t) * dir > 0.0 {
            if stats.accepted + stats.rejected >= opts.max_steps {
                return Err(Error::StepBudget(opts.max_steps));
            }
            let remaining = (target - t).abs();
            let mut last = false;
            let mut step = h.min(opts.max_step);
            if step >= remaining * (1.0 - 1e-12) {
                step = remaining;
                last = true;
            }
            if step < 16.0 * f64::EPSILON * t.abs().max(1.0) {
                return Err(Error::StepUnderflow { l: t, h: step });
            }
            let hs = dir * step;

            for s in 1..7 {
                for i in 0..n {
                    let mut acc = 0.0;
                    for j in 0..s {
                        acc += A[s][j] * k[j][i];
                    }
                    ytmp[i] = y[i] + hs * acc;
                }
                if s == 6 {
                    // the last stage is the derivative at the new point
                    ynew.copy_from_slice(&ytmp);
                }
                f(t + C[s] * hs, &ytmp, &mut k[s]);
                stats.rhs_evals += 1;
            }
            for i in 0..n {
                let mut e = 0.0;
                for s in 0..7 {
                    e += E[s] * k[s][i];
                }
                err[i] = hs * e;
            }
            let en = scaled_rms(&err, &y, &ynew, opts);
            if en <= 1.0 {
                t = if last { target } else { t + hs };
                y.copy_from_slice(&ynew);
                hook(t, &mut y)?;
                stats.accepted += 1;
                if y == ynew {
                    let (head, tail) = k.split_at_mut(6);
                    head[0].copy_from_slice(&tail[0]);
                } else {
                    // the hook projected the state; refresh the derivative
                    f(t, &y, &mut k[0]);
                    stats.rhs_evals += 1;
                }
                let mut fac = if en == 0.0 { MAX_FACTOR } else { SAFETY * en.powf(-0.2) };
                fac = fac.clamp(MIN_FACTOR, MAX_FACTOR);
                if rejected_last {
                    fac = fac.min(1.0);
                }
                rejected_last = false;
                // keep the natural step after a clamped final step
                if !last || step >= h {
                    h = step * fac;
                }
            } else {
                stats.rejected += 1;
                rejected_last = true;
                let fac = if en.is_finite() {
                    (SAFETY * en.powf(-0.2)).clamp(MIN_FACTOR, 1.0)
                } else {
                    MIN_FACTOR
                };
                h = step * fac;
            }
        }
        out.push(y.clone());
    }
    Ok((out, stats))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn no_hook(_: f64, _: &mut [f64]) -> Result<()> {
        Ok(())
    }

    #[test]
    fn exponential_decay() {
        let grid: Vec<f64> = (0..=10).map(|k| k as f64 * 0.5).collect();
        let (ys, stats) = integrate(|_, y, dy| dy[0] = -y[0], vec![1.0], &grid, &OdeOptions::default(), no_hook).unwrap();
        for (t, y) in grid.iter().zip(&ys) {
            assert!((y[0] - (-t).exp()).abs() < 1e-10, "{t}");
        }
        assert!(stats.accepted > 0);
    }

    #[test]
    fn harmonic_oscillator_backwards() {
        let grid = [0.0, -1.0, -3.0];
        let (ys, _) = integrate(
            |_, y, dy| {
                dy[0] = y[1];
                dy[1] = -y[0];
            },
            vec![1.0, 0.0],
            &grid,
            &OdeOptions::default(),
            no_hook,
        )
        .unwrap();
        for (t, y) in grid.iter().zip(&ys) {
            assert!((y[0] - t.cos()).abs() < 1e-9);
            assert!((y[1] + t.sin()).abs() < 1e-9);
        }
    }

    #[test]
    fn time_dependent_rhs_hits_grid_exactly() {
        let grid = [0.0, 0.1, 0.7, 2.0];
        let (ys, _) = integrate(|t, _, dy| dy[0] = 3.0 * t * t, vec![0.0], &grid, &OdeOptions::default(), no_hook)
            .unwrap();
        for (t, y) in grid.iter().zip(&ys) {
            assert!((y[0] - t.powi(3)).abs() < 1e-12);
        }
    }

    #[test]
    fn hook_can_abort() {
        let r = integrate(
            |_, _, dy| dy[0] = 1.0,
            vec![0.0],
            &[0.0, 10.0],
            &OdeOptions::default(),
            |t, y| {
                if y[0] > 1.0 {
                    Err(Error::InvariantViolation {
                        name: "test",
                        drift: y[0],
                        limit: 1.0,
                        l: t,
                    })
                } else {
                    Ok(())
                }
            },
        );
        assert!(matches!(r, Err(Error::InvariantViolation { .. })));
    }

    #[test]
    fn rejects_non_monotone_grid_and_budget() {
        let r = integrate(|_, _, dy| dy[0] = 1.0, vec![0.0], &[0.0, 1.0, 0.5], &OdeOptions::default(), no_hook);
        assert!(matches!(r, Err(Error::NonIncreasingTimes(2))));
        let opts = OdeOptions {
            max_steps: 3,
            max_step: 0.01,
            ..OdeOptions::default()
        };
        let r = integrate(|_, _, dy| dy[0] = 1.0, vec![0.0], &[0.0, 1.0], &opts, no_hook);
        assert!(matches!(r, Err(Error::StepBudget(3))));
    }
}
