//! Lanczos construction over operator space, Krylov complexity and the
//! speed limits of the complexity operator for closed algebras.

mod chain;
mod complexity;
mod lanczos;

pub use chain::{su2_chain, AlgebraParams, KrylovChain};
pub use complexity::{
    algebra_closure_check, complexity_autocorr, complexity_trajectory, complexity_velocity, geodesic_autocorr,
    oqsl_k, oqsl_k_on_chain, span_residual, stationary_span_kernel_dim, su2_complexity, super_heisenberg_k,
    super_heisenberg_k_closed, ChainSpectrum, ClosureResiduals, ComplexityTrajectory, OqslK, OqslKPoint,
    DENSE_CHAIN_MAX_D,
};
pub use lanczos::{lanczos, KrylovBasis, LANCZOS_REL_TOL};
