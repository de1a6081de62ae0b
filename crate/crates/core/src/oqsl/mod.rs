//! Operator quantum speed limits: the plain bound, its refinement by a
//! stationary component, the optimal refinement, and saturation checks.

mod bounds;
mod path;
mod report;
mod saturation;
mod stationary;

pub use bounds::{autocorr_angle, tau_qsl, tau_qsl_spectral, tau_refined, RATIO_EXCESS_TOL};
pub use path::{autocorrelation, avg_velocity, speeds, FlowPath, NORM_PRESERVATION_TOL};
pub use report::{speed_limit_report, FieldValue, SpeedLimitReport, REPORT_FIELDS, STATIONARY_REL_TOL};
pub use saturation::{saturation_check, SaturationReport, SUPPORT_TOL};
pub use stationary::{
    identity_component, kernel_intersection, krylov_dimension, path_stationary, stationary_component,
    StationaryDecomposition, KERNEL_SV_TOL,
};
