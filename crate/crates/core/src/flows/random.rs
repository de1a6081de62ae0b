//! Seeded random initial data.
//!
//! The generator is ChaCha8 (`rand_chacha::ChaCha8Rng::seed_from_u64`).
//! Each uniform draw takes the top 53 bits of one `next_u64` output,
//! `u = (x >> 11) * 2^-53` in `[0, 1)`, and maps it to `2u - 1` in `[-1, 1)`.
//! Diagonal entries are drawn first, then couplings, so a given `(n, seed)`
//! always produces the same arrays.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use super::tridiagonal::TridiagonalHamiltonian;
use crate::error::{Error, Result};

pub fn uniform_pm1(rng: &mut impl RngCore) -> f64 {
    let u = (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
    2.0 * u - 1.0
}

/// Symmetric tridiagonal matrix with i.i.d. uniform entries on `[-1, 1]`.
pub fn random_tridiagonal(n: usize, seed: u64) -> Result<TridiagonalHamiltonian> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("need n >= 2, got {n}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let h: Vec<f64> = (0..n).map(|_| uniform_pm1(&mut rng)).collect();
    let v: Vec<f64> = (0..n - 1).map(|_| uniform_pm1(&mut rng)).collect();
    TridiagonalHamiltonian::new(h, v)
}

/// As [`random_tridiagonal`], with the mean of the diagonal subtracted.
pub fn random_tridiagonal_traceless(n: usize, seed: u64) -> Result<TridiagonalHamiltonian> {
    let t = random_tridiagonal(n, seed)?;
    let mean = t.diag().iter().sum::<f64>() / n as f64;
    let h = t.diag().iter().map(|x| x - mean).collect();
    TridiagonalHamiltonian::new(h, t.offdiag().to_vec())
}
