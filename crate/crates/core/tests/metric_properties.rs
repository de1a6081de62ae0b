use oqsl_core::linalg;
use oqsl_core::opspace::{
    gibbs_metric, hs_inner, io, kubo_metric, liouvillian, metric_from_rho, MetricP, Operator,
};
use oqsl_core::sample::{random_density, random_hermitian, random_operator, random_psd_superop, rng_from_seed};
use oqsl_core::Complex64;
use proptest::prelude::*;

fn setup(dim: usize, seed: u64) -> (MetricP, Operator, Operator) {
    let mut rng = rng_from_seed(seed);
    let rank = 1 + (seed as usize) % (dim * dim);
    let p = random_psd_superop(dim, rank, &mut rng).unwrap();
    let a = random_operator(dim, &mut rng);
    let b = random_operator(dim, &mut rng);
    (MetricP::new(p).unwrap(), a, b)
}

/// `v_a^dagger P v_b` straight from the dense matrix.
fn dense_inner(m: &MetricP, a: &Operator, b: &Operator) -> Complex64 {
    let p = m.p().to_dense().unwrap();
    (a.to_vec_row_major().adjoint() * p * b.to_vec_row_major())[(0, 0)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn inner_product_axioms(dim in 2usize..=4, seed in any::<u64>()) {
        let (m, a, b) = setup(dim, seed);
        let scale = 1.0 + linalg::fro(&m.p().to_dense().unwrap()) * a.hs_norm() * b.hs_norm();
        let ab = m.inner(&a, &b).unwrap();
        let ba = m.inner(&b, &a).unwrap();
        prop_assert!((ab - ba.conj()).norm() < 1e-12 * scale);
        prop_assert!((ab - dense_inner(&m, &a, &b)).norm() < 1e-12 * scale);

        let z = Complex64::new(0.3, -1.2);
        let lin = m.inner(&a, &(&b.scale(z) + &a)).unwrap();
        let want = ab * z + m.inner(&a, &a).unwrap();
        prop_assert!((lin - want).norm() < 1e-12 * scale);

        let aa = m.inner(&a, &a).unwrap();
        prop_assert!(aa.re >= -1e-12 * scale);
        prop_assert!(aa.im.abs() < 1e-12 * scale);
    }

    #[test]
    fn seminorm_vanishes_exactly_on_the_kernel(dim in 2usize..=4, seed in any::<u64>()) {
        let (m, a, _) = setup(dim, seed);
        let ker = &a - &m.project(&a).unwrap();
        let pa = m.apply(&ker).unwrap();
        prop_assert!(m.seminorm(&ker).unwrap() < 1e-6 * a.hs_norm());
        prop_assert!(pa.hs_norm() < 1e-10 * a.hs_norm() * m.spectrum().last().unwrap().eigenvalue);

        // converse: |P a|^2 <= lambda_max * seminorm(a)^2
        let lmax = m.spectrum().iter().map(|c| c.eigenvalue).fold(0.0, f64::max);
        let s = m.seminorm(&a).unwrap();
        let pa = m.apply(&a).unwrap().hs_norm();
        prop_assert!(pa * pa <= lmax * s * s * (1.0 + 1e-10) + 1e-12);
        prop_assert!(s * s <= pa * a.hs_norm() * (1.0 + 1e-10) + 1e-12);
    }

    #[test]
    fn projection_preserves_the_inner_product(dim in 2usize..=4, seed in any::<u64>()) {
        let (m, a, b) = setup(dim, seed);
        let (ah, bh) = (m.project(&a).unwrap(), m.project(&b).unwrap());
        let lhs = m.inner(&a, &b).unwrap();
        let rhs = m.inner(&ah, &bh).unwrap();
        prop_assert!((lhs - rhs).norm() < 1e-10);
        // idempotent, and orthogonal in the Hilbert-Schmidt sense
        prop_assert!((&m.project(&ah).unwrap() - &ah).hs_norm() < 1e-12 * a.hs_norm());
        let residual = &a - &ah;
        prop_assert!(hs_inner(&residual, &ah).unwrap().norm() < 1e-12 * a.hs_norm().powi(2));
    }

    #[test]
    fn rho_metrics_are_positive(dim in 2usize..=4, seed in any::<u64>()) {
        let mut rng = rng_from_seed(seed);
        let r1 = random_density(dim, 1 + (seed as usize) % dim, &mut rng);
        let r2 = random_density(dim, dim, &mut rng);
        let m = metric_from_rho(&r1, &r2).unwrap();
        let a = random_operator(dim, &mut rng);
        let direct = (a.adjoint().matrix() * r1.matrix() * a.matrix() * r2.matrix()).trace();
        prop_assert!((m.inner(&a, &a).unwrap() - direct).norm() < 1e-12 * (1.0 + direct.norm()));
        prop_assert!(m.spectrum().iter().all(|c| c.eigenvalue > 0.0));
    }

    #[test]
    fn thermal_metrics_commute_with_the_liouvillian(dim in 2usize..=4, seed in any::<u64>(), beta in 0.1f64..3.0) {
        let h = random_hermitian(dim, &mut rng_from_seed(seed));
        let l = liouvillian(&h);
        prop_assert!(gibbs_metric(&h, beta).unwrap().commutator_residual(&l).unwrap() < 1e-10);
        let k = kubo_metric(&h, beta).unwrap();
        prop_assert!(k.metric().commutator_residual(&l).unwrap() < 1e-10);
        prop_assert!(k.center(&Operator::identity(dim)).unwrap().hs_norm() < 1e-13);
    }

    #[test]
    fn text_and_binary_round_trip(dim in 1usize..=5, seed in any::<u64>()) {
        let a = random_operator(dim, &mut rng_from_seed(seed));
        prop_assert_eq!(io::from_binary(&io::to_binary(&a)).unwrap(), a.clone());
        prop_assert_eq!(io::parse_text(&io::to_text(&a)).unwrap(), a);
    }
}

#[test]
fn kernel_element_of_a_projector_metric() {
    let r2 = Operator::from_diagonal(&[1.0, 0.0]);
    let m = metric_from_rho(&Operator::identity(2), &r2).unwrap();
    let a = Operator::ket_bra(2, 0, 1);
    assert_eq!(m.seminorm(&a).unwrap(), 0.0);
    let sym = &a + &Operator::ket_bra(2, 1, 0);
    let p = m.project(&sym).unwrap();
    assert!((&p - &Operator::ket_bra(2, 1, 0)).hs_norm() < 1e-14);
}
