use proptest::prelude::*;

use qmetric_core::channels::{apply_channel, monotonicity_experiment, pushforward_family, random_tpcp};
use qmetric_core::family::directional_family;
use qmetric_core::gauge::apply_gauge;
use qmetric_core::hermitian::{max_abs, relative_entropy};
use qmetric_core::metrics::{
    c_l_information, c_upsilon_states, classical_fisher, kmb_information, rld_information, sld_information,
};
use qmetric_core::registry::{bloch3, random_full_rank, random_pure, rot3_mixture};
use qmetric_core::tangent::tangent_data;
use qmetric_core::{CFunction, MetricKind, PhaseAssignment, Povm};

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig {
        cases,
        ..ProptestConfig::default()
    }
}

proptest! {
    #![proptest_config(config(32))]

    #[test]
    fn rephasing_never_changes_the_state(
        seed in 0u64..1000,
        a in prop::collection::vec(-3.0f64..3.0, 3),
        t in -1.0f64..1.0,
    ) {
        let fam = random_full_rank(3, 1, seed, 0.5, false).unwrap();
        let coef = a.clone();
        let pa = PhaseAssignment::closed(3, move |x| coef.iter().map(|c| c * x[0] * x[0] + c).collect());
        let g = apply_gauge(&fam, &pa).unwrap();
        let sp = g.spectral_at(&[t]).unwrap();
        prop_assert!(max_abs(&(sp.reconstruct() - fam.matrix_at(&[t]))) < 1e-10);
    }

    #[test]
    fn cl_is_gauge_invariant_but_upsilon_is_not_smaller(
        seed in 0u64..1000,
        a in prop::collection::vec(-2.0f64..2.0, 4),
        t in -1.0f64..1.0,
    ) {
        let fam = random_full_rank(4, 1, seed, 0.3, false).unwrap();
        let coef = a.clone();
        let pa = PhaseAssignment::closed(4, move |x| coef.iter().map(|c| (c * x[0]).sin()).collect());
        let g = apply_gauge(&fam, &pa).unwrap();
        let cl = c_l_information(&fam, &[t]).unwrap();
        prop_assert!(c_l_information(&g, &[t]).unwrap().max_abs_diff(&cl) < 1e-9 * cl.max_abs().max(1.0));
        prop_assert!(c_upsilon_states(&g, &[t]).unwrap().scalar() >= cl.scalar() - 1e-9);
    }

    #[test]
    fn sandwich_on_random_families(seed in 0u64..10_000, d in 2usize..5, p in 1usize..4) {
        let fam = random_full_rank(d, p, seed, 0.6, false).unwrap();
        let theta = vec![0.2; p];
        let h = sld_information(&fam, &theta).unwrap();
        let cl = c_l_information(&fam, &theta).unwrap();
        let cu = c_upsilon_states(&fam, &theta).unwrap();
        prop_assert!(cl.order_margin(&h) >= -1e-8);
        prop_assert!(cu.order_margin(&cl) >= -1e-8);
        prop_assert!(h.min_eigenvalue() >= -1e-9);
    }

    #[test]
    fn monotone_metrics_are_ordered(seed in 0u64..10_000, d in 2usize..5) {
        let fam = random_full_rank(d, 1, seed, 0.5, false).unwrap();
        let s = sld_information(&fam, &[0.1]).unwrap().scalar();
        let k = kmb_information(&fam, &[0.1]).unwrap().scalar();
        let r = rld_information(&fam, &[0.1]).unwrap().scalar();
        prop_assert!(s <= k + 1e-9 && k <= r + 1e-9);
    }

    #[test]
    fn pure_families_have_cl_equal_to_sld(seed in 0u64..10_000, d in 2usize..6, p in 1usize..3) {
        let fam = random_pure(d, p, seed, false).unwrap();
        let theta = vec![-0.3; p];
        let cl = c_l_information(&fam, &theta).unwrap();
        let h = sld_information(&fam, &theta).unwrap();
        prop_assert!(cl.max_abs_diff(&h) < 1e-9 * h.max_abs().max(1.0));
    }

    #[test]
    fn measurement_never_beats_sld(seed in 0u64..10_000, outcomes in 2usize..6) {
        let fam = random_full_rank(3, 2, seed, 0.5, false).unwrap();
        let theta = [0.3, -0.1];
        let h = sld_information(&fam, &theta).unwrap();
        let f = classical_fisher(&fam, &theta, &Povm::random(3, outcomes, seed + 1)).unwrap();
        prop_assert!(h.order_margin(&f) >= -1e-8);
    }

    #[test]
    fn random_channels_are_trace_preserving(seed in 0u64..10_000, d in 1usize..6, n in 1usize..6) {
        prop_assert!(random_tpcp(d, n, seed).unwrap().tp_residual() < 1e-9);
    }

    #[test]
    fn relative_entropy_is_nonnegative(s1 in 0u64..10_000, s2 in 0u64..10_000, t in -1.0f64..1.0) {
        let a = random_full_rank(3, 1, s1, 0.5, false).unwrap().evaluate(&[t]).unwrap();
        let b = random_full_rank(3, 1, s2, 0.5, false).unwrap().evaluate(&[-t]).unwrap();
        prop_assert!(relative_entropy(&a, &b).unwrap() >= -1e-12);
        prop_assert!(relative_entropy(&a, &a).unwrap().abs() < 1e-12);
    }

    #[test]
    fn c_functions_are_symmetric_and_homogeneous(x in 1e-3f64..10.0, y in 1e-3f64..10.0, s in 1e-2f64..100.0) {
        for cf in [CFunction::SLD, CFunction::KMB, CFunction::RLD, CFunction::CL] {
            let c = cf.c(x, y);
            if !c.is_finite() {
                continue;
            }
            prop_assert!((c - cf.c(y, x)).abs() <= 1e-10 * c.abs().max(1.0));
            prop_assert!((cf.c(s * x, s * y) * s - c).abs() <= 1e-10 * c.abs().max(1.0));
        }
    }

    #[test]
    fn directional_data_is_a_contraction(
        seed in 0u64..10_000,
        v in prop::collection::vec(-1.0f64..1.0, 3),
    ) {
        prop_assume!(v.iter().any(|x| x.abs() > 1e-3));
        let fam = random_full_rank(3, 3, seed, 0.4, false).unwrap();
        let theta = [0.1, 0.2, -0.3];
        let dir = directional_family(&fam, &theta, &v).unwrap();
        let scalar = tangent_data(&dir, &[0.0]).unwrap();
        let multi = tangent_data(&fam, &theta).unwrap().contract(&v);
        prop_assert!(max_abs(&(&scalar.overlaps[0] - &multi.overlaps[0])) < 1e-6);
    }
}

#[test]
fn sld_is_monotone_across_channels_and_families() {
    let mut families = vec![
        (bloch3().restrict(&[0.6, 0.7, 0.2], 1).unwrap(), vec![0.7]),
        (rot3_mixture(0.1).unwrap(), vec![0.3]),
    ];
    for seed in 0..8 {
        families.push((
            random_full_rank(2 + seed as usize % 3, 1, 900 + seed, 0.5, false).unwrap(),
            vec![0.2],
        ));
    }
    let mut worst = f64::NEG_INFINITY;
    for (fam, theta) in &families {
        for seed in 0..100u64 {
            let ch = random_tpcp(fam.dim(), 1 + seed as usize % 4, 5000 + seed).unwrap();
            let rep = monotonicity_experiment(fam, theta, MetricKind::Sld, &ch).unwrap();
            worst = worst.max(rep.max_increase);
        }
    }
    assert!(worst <= 1e-8, "largest SLD increase {worst:e}");
}

#[test]
fn cl_grows_under_depolarizing_for_every_tested_point() {
    for eps in [0.01, 0.1, 0.2, 0.3, 0.33] {
        for r in [-0.1, 0.0, 0.3, 0.6, 0.9, 0.99] {
            let ch = qmetric_core::channels::depolarizing_channel(3, r).unwrap();
            let rep = monotonicity_experiment(&rot3_mixture(eps).unwrap(), &[0.5], MetricKind::Cl, &ch).unwrap();
            assert!(rep.delta.scalar() > 0.0, "eps {eps} r {r}");
        }
    }
}

#[test]
fn unitary_channels_preserve_invariant_metrics() {
    let fam = random_full_rank(4, 2, 66, 0.5, false).unwrap();
    let theta = [0.3, 0.2];
    for seed in 0..10 {
        let u = random_tpcp(4, 1, 70 + seed).unwrap();
        let pushed = pushforward_family(&u, &fam).unwrap();
        for m in [MetricKind::Sld, MetricKind::Kmb, MetricKind::Rld, MetricKind::Cl] {
            let a = m.compute(&fam, &theta, None).unwrap();
            let b = m.compute(&pushed, &theta, None).unwrap();
            assert!(a.max_abs_diff(&b) < 1e-8 * a.max_abs().max(1.0), "{m}");
        }
        let rho = fam.evaluate(&theta).unwrap();
        assert!(apply_channel(&u, &rho).is_ok());
    }
}
