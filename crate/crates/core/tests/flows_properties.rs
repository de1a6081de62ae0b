use oqsl_core::flows::{
    dephasing_rate, default_l_max, flow_oqsl, integrate_flow, max_off_band, overlap_increase, partial_trace_decrease,
    random_tridiagonal, random_tridiagonal_traceless, toda_rhs, toda_tight_family, FlowInput, FlowOptions,
    GeneratorKind, SampleGrid, TridiagonalHamiltonian,
};
use oqsl_core::opspace::Operator;
use proptest::prelude::*;

fn opts(n: usize) -> FlowOptions {
    FlowOptions {
        samples: SampleGrid::Log { n, l_min: 1e-3 },
        ..FlowOptions::default()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn wegner_dephases_monotonically(n in 3usize..=6, seed in any::<u64>()) {
        let t = random_tridiagonal_traceless(n, seed).unwrap();
        let l_max = default_l_max(&FlowInput::Tridiagonal(t.clone())).min(500.0);
        let tr = integrate_flow(t, &GeneratorKind::Wegner, l_max, &opts(80)).unwrap();
        prop_assert!(tr.max_spectrum_drift < 1e-8);
        prop_assert!(overlap_increase(&tr).unwrap() < 1e-12);
        for (th, vi) in tr.theta.iter().zip(&tr.velocity_integral) {
            prop_assert!(*th <= vi + 1e-9);
        }
        for w in tr.offdiag_sq.windows(2) {
            prop_assert!(w[1] <= w[0] * (1.0 + 1e-9) + 1e-14);
        }
    }

    #[test]
    fn toda_keeps_band_and_orders_diagonal(n in 3usize..=8, seed in any::<u64>()) {
        let t = random_tridiagonal(n, seed).unwrap();
        let l_max = default_l_max(&FlowInput::Tridiagonal(t.clone())).min(500.0);
        let tr = integrate_flow(t, &GeneratorKind::Toda, l_max, &opts(80)).unwrap();
        prop_assert_eq!(max_off_band(&tr), 0.0);
        prop_assert!(partial_trace_decrease(&tr) < 1e-10);
        prop_assert!(tr.max_spectrum_drift < 1e-8);
        let q = flow_oqsl(&tr);
        for k in 0..q.l.len() {
            prop_assert!(q.theta[k] <= q.velocity_integral[k] + 1e-9);
            prop_assert!(q.l_qsl[k] <= q.l[k] * (1.0 + 1e-9));
        }
    }

    #[test]
    fn dense_toda_agrees_with_band_coordinates(n in 3usize..=5, seed in any::<u64>()) {
        let t = random_tridiagonal(n, seed).unwrap();
        let o = FlowOptions { samples: SampleGrid::Uniform(5), ..FlowOptions::default() };
        let band = integrate_flow(t.clone(), &GeneratorKind::Toda, 2.0, &o).unwrap();
        let dense = integrate_flow(t.to_operator(), &GeneratorKind::Toda, 2.0, &o).unwrap();
        for (a, b) in band.hamiltonians.iter().zip(&dense.hamiltonians) {
            prop_assert!((a - b).hs_norm() < 1e-6);
        }
    }

    #[test]
    fn dephasing_rate_matches_commutator_form(seed in any::<u64>()) {
        // d/dl Tr H_od^2 = 2 Tr(H_od [eta, H]) with eta = [H_T, H]
        let t = random_tridiagonal(3, seed).unwrap();
        let mut h = t.to_operator();
        let extra = Operator::ket_bra(3, 0, 2).scale_real(0.4);
        h = &h + &(&extra + &extra.adjoint());
        let eta = h.diagonal_part().commutator(&h).unwrap();
        let dh = eta.commutator(&h).unwrap();
        let want = 2.0 * (h.off_diagonal_part().matrix() * dh.matrix()).trace().re;
        prop_assert!((dephasing_rate(&h) - want).abs() < 1e-12 * (1.0 + want.abs()));
    }
}

#[test]
fn toda_rhs_is_zero_on_diagonal_input() {
    let t = TridiagonalHamiltonian::new(vec![1.0, -2.0, 0.5], vec![0.0, 0.0]).unwrap();
    let (dh, dv) = toda_rhs(&t);
    assert!(dh.iter().chain(&dv).all(|x| *x == 0.0));
}

#[test]
fn tight_family_follows_its_closed_form() {
    for n in [2usize, 5, 20] {
        let f = toda_tight_family(n, 1.0, 0.0).unwrap();
        let o = FlowOptions { samples: SampleGrid::Uniform(41), ..FlowOptions::default() };
        let tr = integrate_flow(f.initial(), &GeneratorKind::Toda, 6.0 * f.l0(), &o).unwrap();
        let bands = tr.tridiagonal.as_ref().unwrap();
        for (k, &l) in tr.grid.iter().enumerate() {
            let want = f.at(l);
            let got = &bands[k];
            for (x, y) in want.diag().iter().chain(want.offdiag()).zip(got.diag().iter().chain(got.offdiag())) {
                assert!((x - y).abs() < 1e-6, "N={n} l={l}");
            }
            assert!((tr.theta[k] - tr.velocity_integral[k]).abs() < 1e-8, "N={n} l={l}");
            assert!((tr.theta[k] - (f.theta(l) - f.theta(0.0))).abs() < 1e-8);
        }
    }
}
