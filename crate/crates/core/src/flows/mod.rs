//! Isospectral Hamiltonian flows `dH/dl = [eta(l), H(l)]`.

mod diagnostics;
mod generators;
mod integrate;
pub mod random;
mod tight;
mod tridiagonal;
mod xy;

pub use diagnostics::{
    dephasing_rate, dephasing_rate_check, flow_oqsl, max_off_band, offdiag_overlap, offdiag_overlap_superop,
    overlap_increase, partial_trace_decrease, FlowOqsl, DEPHASING_FD_STEP,
};
pub use generators::{toda_generator, toda_generator_tridiagonal, wegner_generator, CustomGenerator, GeneratorKind};
pub use integrate::{
    default_l_max, integrate_flow, operator_angle, FlowInput, FlowOptions, FlowTrajectory, SampleGrid,
};
pub use random::{random_tridiagonal, random_tridiagonal_traceless};
pub use tight::{toda_tight_family, TodaTightFamily};
pub use tridiagonal::{toda_rhs, TridiagonalHamiltonian};
pub use xy::{xy_embed, xy_hamiltonian, FullSpaceCheck, XyEmbedding, XY_FULL_SPACE_MAX_N};
