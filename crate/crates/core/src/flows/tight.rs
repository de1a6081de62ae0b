use super::tridiagonal::TridiagonalHamiltonian;
use crate::error::{Error, Result};

/// One-parameter family of tridiagonal matrices on which the Toda flow moves
/// along a great circle at the speed that saturates the operator speed limit:
///
/// ```text
/// h_n(l) = -(2 h1 / (N - 1)) (n - (N + 1)/2) sin(theta(l))
/// v_n(l) = sqrt(n (N - n)) h1 cos(theta(l)) / (N - 1)
/// theta'(l) = k cos(theta(l)),  k = 2 h1 / (N - 1)
/// ```
///
/// so `sin(theta(l)) = tanh(k l + atanh(sin(theta0)))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TodaTightFamily {
    pub n: usize,
    pub h1: f64,
    pub theta0: f64,
}

pub fn toda_tight_family(n: usize, h1: f64, theta0: f64) -> Result<TodaTightFamily> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("tight family needs N >= 2, got {n}")));
    }
    if !(h1 > 0.0 && h1.is_finite()) {
        return Err(Error::InvalidArgument(format!("h1 must be positive, got {h1}")));
    }
    let s = theta0.sin();
    if !(s.abs() < 1.0) || theta0.cos() <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "theta0 = {theta0} must lie in (-pi/2, pi/2)"
        )));
    }
    Ok(TodaTightFamily { n, h1, theta0 })
}

impl TodaTightFamily {
    /// Rate `k = 2 h1 / (N - 1)` in `theta' = k cos(theta)`.
    pub fn rate(&self) -> f64 {
        2.0 * self.h1 / (self.n - 1) as f64
    }

    /// Plotting scale `l0 = (N - 1) / (4 h1)`.
    pub fn l0(&self) -> f64 {
        (self.n - 1) as f64 / (4.0 * self.h1)
    }

    /// Gudermannian argument `x(l) = k l + atanh(sin(theta0))`.
    fn argument(&self, l: f64) -> f64 {
        self.rate() * l + self.theta0.sin().atanh()
    }

    pub fn theta(&self, l: f64) -> f64 {
        self.argument(l).sinh().atan()
    }

    pub fn sin_theta(&self, l: f64) -> f64 {
        self.argument(l).tanh()
    }

    pub fn cos_theta(&self, l: f64) -> f64 {
        1.0 / self.argument(l).cosh()
    }

    pub fn at(&self, l: f64) -> TridiagonalHamiltonian {
        let n = self.n;
        let nf = n as f64;
        let (s, c) = (self.sin_theta(l), self.cos_theta(l));
        let scale = self.h1 / (nf - 1.0);
        let h = (1..=n).map(|k| -2.0 * scale * (k as f64 - (nf + 1.0) / 2.0) * s).collect();
        let v = (1..n).map(|k| ((k * (n - k)) as f64).sqrt() * scale * c).collect();
        TridiagonalHamiltonian::new(h, v).expect("consistent lengths")
    }

    pub fn initial(&self) -> TridiagonalHamiltonian {
        self.at(0.0)
    }
}
