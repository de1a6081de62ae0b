use crate::error::{Error, Result};
use crate::linalg;
use crate::opspace::{MetricP, Operator};
use crate::Complex64;

use super::bounds::{tau_qsl, RATIO_EXCESS_TOL};
use super::path::{autocorrelation, avg_velocity, FlowPath};
use super::stationary::{identity_component, path_stationary};

/// Velocities below this fraction of `sqrt(C(0)) * 2 max_t |H_t|` mark the
/// path as stationary.
pub const STATIONARY_REL_TOL: f64 = 1e-12;

/// Plain, refined and optimal bounds for one path.
#[derive(Debug, Clone, PartialEq)]
pub struct SpeedLimitReport {
    /// Elapsed time of the path.
    pub tau: f64,
    pub tau_qsl: f64,
    /// Refined bound with `S` the identity component.
    pub tau_ref: f64,
    /// Refined bound with `S = P_0`, or with the identity component when
    /// the kernel was not invariant.
    pub tau_oref: f64,
    pub avg_velocity: f64,
    /// Raw `arccos(Re C(tau) / C(0))`, in `[0, pi]`.
    pub angle: f64,
    pub angle_ref: f64,
    pub angle_oref: f64,
    pub identity_norm: f64,
    pub stationary_norm: f64,
    pub autocorr_start: Complex64,
    pub autocorr_end: Complex64,
    pub stationary: bool,
    pub kernel_invariant: bool,
}

/// Column names of [`SpeedLimitReport::record`], in order.
pub const REPORT_FIELDS: [&str; 18] = [
    "tau",
    "tau_qsl",
    "tau_ref",
    "tau_oref",
    "avg_velocity",
    "angle",
    "angle_ref",
    "angle_oref",
    "identity_norm",
    "stationary_norm",
    "autocorr_start_re",
    "autocorr_start_im",
    "autocorr_end_re",
    "autocorr_end_im",
    "stationary",
    "kernel_invariant",
    "ordering_ok",
    "tau_minus_tau_oref",
];

/// Value of a report field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FieldValue {
    Real(f64),
    Flag(bool),
}

impl SpeedLimitReport {
    /// Checks `tau >= tau_oref >= tau_ref >= tau_qsl >= 0` with slack `tol`.
    pub fn ordering_holds(&self, tol: f64) -> bool {
        self.tau_qsl >= -tol
            && self.tau_ref >= self.tau_qsl - tol
            && self.tau_oref >= self.tau_ref - tol
            && self.tau >= self.tau_oref - tol
    }

    /// Flat key-value form with the names in [`REPORT_FIELDS`].
    pub fn record(&self) -> Vec<(&'static str, FieldValue)> {
        use FieldValue::{Flag, Real};
        let values = [
            Real(self.tau),
            Real(self.tau_qsl),
            Real(self.tau_ref),
            Real(self.tau_oref),
            Real(self.avg_velocity),
            Real(self.angle),
            Real(self.angle_ref),
            Real(self.angle_oref),
            Real(self.identity_norm),
            Real(self.stationary_norm),
            Real(self.autocorr_start.re),
            Real(self.autocorr_start.im),
            Real(self.autocorr_end.re),
            Real(self.autocorr_end.im),
            Flag(self.stationary),
            Flag(self.kernel_invariant),
            Flag(self.ordering_holds(RATIO_EXCESS_TOL)),
            Real(self.tau - self.tau_oref),
        ];
        REPORT_FIELDS.iter().copied().zip(values).collect()
    }
}

/// Angle and bound for the moving part `V = A^ - S`, from `|V|^2` and
/// `<V|V_tau>` computed directly rather than as differences of `C`.
fn moving_part_bound(c0: f64, vv: f64, vvt: Complex64, v: f64) -> Result<(f64, f64)> {
    if vv <= 0.0 {
        return Ok((0.0, 0.0));
    }
    if vvt.re.abs() - vv > RATIO_EXCESS_TOL * c0 {
        return Err(Error::RatioOutOfRange(vvt.re / vv));
    }
    let angle = linalg::angle_from_deficit((vv - vvt.re) / vv);
    Ok((angle, vv.sqrt() * angle / v))
}

fn moving_part(metric: &MetricP, a_hat: &Operator, a_tau: &Operator, s: &Operator) -> Result<(f64, Complex64)> {
    let v0 = a_hat - s;
    let vt = a_tau - s;
    Ok((metric.inner(&v0, &v0)?.re, metric.inner(&v0, &vt)?))
}

/// Evaluates all three bounds on `path`.
pub fn speed_limit_report(path: &FlowPath) -> Result<SpeedLimitReport> {
    let metric = path.metric();
    let c = autocorrelation(path)?;
    let (c0, c_end) = (c[0].re, *c.last().unwrap());
    let v = avg_velocity(path)?;
    let gen_scale = path.generators().iter().map(|g| g.hs_norm()).fold(0.0, f64::max);
    let tau = path.duration();
    let a_hat = metric.project(&path.states()[0])?;
    let a_tau = metric.project(&path.states()[path.len() - 1])?;

    let s_id = identity_component(metric, &a_hat)?;
    let dec = path_stationary(path)?;
    let identity_norm = metric.seminorm(&s_id)?;
    let stationary_norm = metric.seminorm(&dec.s)?;
    let angle = super::bounds::autocorr_angle(c0, c_end)?;

    let stationary = !(v > STATIONARY_REL_TOL * c0.sqrt() * 2.0 * gen_scale);
    if stationary {
        return Ok(SpeedLimitReport {
            tau,
            tau_qsl: 0.0,
            tau_ref: 0.0,
            tau_oref: 0.0,
            avg_velocity: v,
            angle,
            angle_ref: 0.0,
            angle_oref: 0.0,
            identity_norm,
            stationary_norm,
            autocorr_start: c[0],
            autocorr_end: c_end,
            stationary,
            kernel_invariant: dec.invariant,
        });
    }
    let (vv, vvt) = moving_part(metric, &a_hat, &a_tau, &s_id)?;
    let (angle_ref, tau_ref) = moving_part_bound(c0, vv, vvt, v)?;
    let (vv, vvt) = moving_part(metric, &a_hat, &a_tau, &dec.s)?;
    let (angle_oref, tau_oref) = moving_part_bound(c0, vv, vvt, v)?;
    Ok(SpeedLimitReport {
        tau,
        tau_qsl: tau_qsl(c0, c_end, v)?,
        tau_ref,
        tau_oref,
        avg_velocity: v,
        angle,
        angle_ref,
        angle_oref,
        identity_norm,
        stationary_norm,
        autocorr_start: c[0],
        autocorr_end: c_end,
        stationary,
        kernel_invariant: dec.invariant,
    })
}
