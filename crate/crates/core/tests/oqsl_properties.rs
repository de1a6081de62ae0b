use std::sync::Arc;

use oqsl_core::krylov::lanczos;
use oqsl_core::opspace::{liouvillian, MetricP, Operator};
use oqsl_core::oqsl::{
    krylov_dimension, saturation_check, speed_limit_report, tau_qsl_spectral, FlowPath, REPORT_FIELDS,
};
use oqsl_core::sample::{random_hermitian, random_path, rng_from_seed, two_gap_pair, MetricKind, Schedule};
use proptest::prelude::*;

fn metric_kind(code: u8, beta: f64) -> MetricKind {
    match code % 3 {
        0 => MetricKind::HilbertSchmidt,
        1 => MetricKind::Gibbs { beta },
        _ => MetricKind::Kubo { beta },
    }
}

fn grid(tau: f64, n: usize) -> Vec<f64> {
    (0..=n).map(|k| tau * k as f64 / n as f64).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn bounds_are_ordered(
        dim in 2usize..=4,
        seed in any::<u64>(),
        metric in 0u8..3,
        commuting in any::<bool>(),
        beta in 0.2f64..2.0,
        tau in 0.05f64..3.0,
    ) {
        let schedule = if commuting { Schedule::Commuting } else { Schedule::Constant };
        let path = random_path(dim, metric_kind(metric, beta), schedule, tau, 60, &mut rng_from_seed(seed)).unwrap();
        let r = speed_limit_report(&path).unwrap();
        prop_assert!(r.ordering_holds(1e-9), "{r:?}");
        prop_assert_eq!(r.record().len(), REPORT_FIELDS.len());
    }

    #[test]
    fn non_commuting_paths_are_ordered(dim in 2usize..=4, seed in any::<u64>(), tau in 0.05f64..2.0) {
        let path = random_path(dim, MetricKind::HilbertSchmidt, Schedule::NonCommuting, tau, 80, &mut rng_from_seed(seed))
            .unwrap();
        let r = speed_limit_report(&path).unwrap();
        prop_assert!(r.ordering_holds(1e-9), "{r:?}");
    }

    #[test]
    fn spectral_form_matches_the_path(dim in 2usize..=4, seed in any::<u64>(), tau in 0.05f64..2.0) {
        let mut rng = rng_from_seed(seed);
        let h = random_hermitian(dim, &mut rng);
        let a = random_hermitian(dim, &mut rng);
        let m = Arc::new(MetricP::hilbert_schmidt(dim));
        let path = FlowPath::constant(m.clone(), &h, &a, grid(tau, 10)).unwrap();
        let r = speed_limit_report(&path).unwrap();
        let spectral = tau_qsl_spectral(&m, &h, &a, tau).unwrap();
        prop_assert!((spectral - r.tau_qsl).abs() < 1e-9 * (1.0 + tau));
    }

    #[test]
    fn two_gap_constructions_saturate(dim in 2usize..=4, seed in any::<u64>(), frac in 0.05f64..0.95) {
        let (h, a) = two_gap_pair(dim, &mut rng_from_seed(seed));
        let m = Arc::new(MetricP::hilbert_schmidt(dim));
        // keep omega tau inside the first arc
        let omega = liouvillian_gap(&h, &a);
        let tau = frac * std::f64::consts::PI / omega;
        let path = FlowPath::constant(m, &h, &a, grid(tau, 40)).unwrap();
        let r = speed_limit_report(&path).unwrap();
        let s = saturation_check(&path).unwrap();
        prop_assert!(s.two_eigenspace);
        prop_assert!((r.tau_oref - tau).abs() < 1e-8, "{r:?}");
        prop_assert!(s.equality_gap.abs() < 1e-8);
        prop_assert!(s.structure_residual.unwrap() < 1e-8);
        prop_assert!(s.norm_mismatch.unwrap() < 1e-8);
    }

    #[test]
    fn lanczos_dimension_matches_eigenspace_support(dim in 2usize..=5, seed in any::<u64>()) {
        let mut rng = rng_from_seed(seed);
        let h = random_hermitian(dim, &mut rng);
        let o = random_hermitian(dim, &mut rng);
        let k = lanczos(&h, &o, None).unwrap();
        prop_assert!(k.orthonormality_residual().unwrap() < 1e-10);
        prop_assert!(k.tridiagonality_residual(&h).unwrap() < 1e-10);
        prop_assert_eq!(k.d, krylov_dimension(&liouvillian(&h), &o, 1e-8).unwrap());
    }
}

/// `|E_i - E_j|` of the coupled pair, read off from the speed of the path.
fn liouvillian_gap(h: &Operator, a: &Operator) -> f64 {
    let m = Arc::new(MetricP::hilbert_schmidt(h.dim()));
    let p = FlowPath::constant(m, h, a, vec![0.0]).unwrap();
    let s = saturation_check(&p).unwrap();
    s.frequency
}

#[test]
fn pauli_pair_saturates_on_the_first_arc() {
    let m = Arc::new(MetricP::hilbert_schmidt(2));
    for tau in [0.1, 0.5, 1.0, 1.5] {
        let path = FlowPath::constant(m.clone(), &Operator::pauli_z(), &Operator::pauli_x(), grid(tau, 50)).unwrap();
        let r = speed_limit_report(&path).unwrap();
        assert!((r.tau_oref - tau).abs() < 1e-12, "{r:?}");
        assert!((r.tau_qsl - tau).abs() < 1e-12);
    }
}

#[test]
fn identity_is_reported_stationary() {
    let m = Arc::new(MetricP::hilbert_schmidt(3));
    let h = random_hermitian(3, &mut rng_from_seed(1));
    let path = FlowPath::constant(m, &h, &Operator::identity(3), grid(1.0, 5)).unwrap();
    let r = speed_limit_report(&path).unwrap();
    assert!(r.stationary);
    assert_eq!(r.tau_qsl, 0.0);
}

#[test]
fn thermal_paths_keep_their_norm() {
    for kind in [MetricKind::Gibbs { beta: 1.0 }, MetricKind::Kubo { beta: 1.0 }] {
        let p = random_path(3, kind, Schedule::Constant, 2.0, 20, &mut rng_from_seed(9)).unwrap();
        let c0 = p.metric().seminorm(&p.states()[0]).unwrap();
        let c1 = p.metric().seminorm(&p.states()[p.len() - 1]).unwrap();
        assert!((c0 - c1).abs() < 1e-10 * c0);
    }
}
