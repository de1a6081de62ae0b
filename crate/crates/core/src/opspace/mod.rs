//! Operators, superoperators and positive semi-definite operator metrics.
//!
//! Operators are vectorized row-major: entry `A_nm` of a `dim x dim`
//! operator sits at index `n * dim + m`. Every dense superoperator matrix in
//! this crate uses that convention.

pub mod io;
mod metric;
mod operator;
mod superop;

pub use metric::{
    effective_project, gibbs_metric, gibbs_state, kubo_metric, kubo_weight, metric_from_rho, p_inner, seminorm,
    EffectiveElement, KuboMetric, MetricP, SpectralComponent, KERNEL_REL_TOL, PSD_TOL,
};
pub use operator::{hs_inner, vectorize, Operator};
pub use superop::{liouvillian, super_liouvillian, SuperOperator, DENSE_STORAGE_MAX_DIM, DENSIFY_MAX_DIM};
