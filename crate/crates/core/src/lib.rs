//! Operator quantum speed limits and the operator flows they constrain.
//!
//! The crate is organised in four layers:
//!
//! - [`opspace`]: operators, superoperators, positive semi-definite operator
//!   metrics and the effective Hilbert space they induce.
//! - [`oqsl`]: geometric speed limits for unitary operator flows (plain,
//!   refined and optimally refined), stationary components and saturation
//!   diagnostics.
//! - [`flows`]: Wegner and Toda isospectral Hamiltonian flows, their
//!   diagnostics and the Toda family that saturates the bound.
//! - [`krylov`]: Lanczos over operator space, Krylov complexity, the
//!   dispersion bound and the super-Heisenberg evolution of the complexity
//!   operator.
//!
//! Every value is immutable after construction and every operation is a pure
//! function, so results can be shared freely across threads.

#![forbid(unsafe_code)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod flows;
pub mod krylov;
pub mod linalg;
pub mod ode;
pub mod opspace;
pub mod oqsl;
pub mod sample;

pub use error::{Error, Result};
pub use num_complex::Complex64;
