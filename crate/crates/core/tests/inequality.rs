use std::f64::consts::PI;
use std::time::Instant;

use nseobs_core::inequality::{
    agmon_gamma, agmon_n_rhs, agmon_rhs, brezis_gamma, brezis_rhs, check_agmon_n, check_appendix_integrals,
    check_corollaries, check_prop1_ingredients, default_gammas, evaluate_single, run_audit, AuditSelection, Check,
    SUBSTITUTION_TOL,
};
use nseobs_core::observation::{AverageOperator, Partition};
use nseobs_core::solver::taylor_green;
use nseobs_core::spectral::RandomFieldSpec;
use nseobs_core::{GridSpec, VelocityField};
use proptest::prelude::*;

fn grid() -> GridSpec {
    GridSpec::square(2.0 * PI, 64).unwrap()
}

#[test]
fn agmon_n_holds_on_thousand_fields_for_both_spectra() {
    let start = Instant::now();
    let g = grid();
    let gammas = default_gammas();
    assert_eq!(gammas.len(), 20);
    assert!((gammas[0] - 1e-2).abs() < 1e-15 && (gammas[19] - 1e4).abs() < 1e-9);
    for decay in [1.5, 0.0] {
        let spec = RandomFieldSpec::new(2024, 20, decay, 1000);
        let r = run_audit(&g, &spec, &gammas, None, AuditSelection::ALL).unwrap();
        assert!(r.passed(), "decay {decay}: {:?}", &r.violations[..r.violations.len().min(5)]);
        let s = r.summary(Check::AgmonN).unwrap();
        assert_eq!(s.evaluations, 1000 * 22);
        assert!(r.substitution_deviation <= SUBSTITUTION_TOL);
        assert!(s.worst_relative_margin > 0.0);
    }
    assert!(start.elapsed().as_secs() < 120);
}

#[test]
fn audit_is_reproducible_and_reports_seed() {
    let g = GridSpec::new(3.0, 5.0, 32, 48).unwrap();
    let spec = RandomFieldSpec::new(77, 10, 1.0, 30);
    let a = run_audit(&g, &spec, &default_gammas(), None, AuditSelection::ALL).unwrap();
    let b = run_audit(&g, &spec, &default_gammas(), None, AuditSelection::ALL).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.seed, 77);
    assert!(a.passed());
    assert_eq!(a.violations_csv(), "check,seed,field_id,gamma,lhs,rhs,margin\n");
}

#[test]
fn empty_sample_set_gives_empty_report() {
    let spec = RandomFieldSpec::new(1, 8, 1.0, 0);
    let r = check_agmon_n(&grid(), &spec, &default_gammas()).unwrap();
    assert!(r.passed() && r.summaries.is_empty() && r.fields == 0);
}

#[test]
fn taylor_green_bounds() {
    let g = GridSpec::square(2.0 * PI, 32).unwrap();
    let u = taylor_green(g, 1.0);
    let rows = evaluate_single(&u, &[1.0]).unwrap();
    let (_, lhs, rhs) = rows[0];
    assert!((lhs - 1.0).abs() < 1e-12);
    assert!((rhs - 5.06).abs() < 0.01);
    let (h1, lap) = (u.h1_norm(), u.lap_norm());
    assert!(agmon_rhs(&g, h1, lap) / lhs > 1.0);
    assert!(brezis_rhs(&g, h1, lap) > lhs);
}

#[test]
fn zero_field_is_trivially_bounded() {
    let rows = evaluate_single(&VelocityField::zeros(grid()), &default_gammas()).unwrap();
    assert!(rows.iter().all(|&(_, l, r)| l == 0.0 && r == 0.0));
}

#[test]
fn corollary_substitutions_hold_on_hundred_fields() {
    let spec = RandomFieldSpec::new(5, 16, 1.5, 100);
    let r = check_corollaries(&grid(), &spec).unwrap();
    assert!(r.passed());
    assert!(r.substitution_deviation <= 1e-12, "{}", r.substitution_deviation);
    assert!(r.summary(Check::Agmon).unwrap().evaluations == 200);
    assert!(r.summary(Check::Brezis).unwrap().evaluations == 100);
}

proptest! {
    #![proptest_config(ProptestConfig { failure_persistence: None, ..ProptestConfig::with_cases(64) })]

    #[test]
    fn brezis_argument_is_scale_invariant(h1 in 1e-3f64..1e3, lap in 1e-3f64..1e3, c in 1e-3f64..1e3) {
        let g = GridSpec::new(2.0, 7.0, 8, 8).unwrap();
        prop_assert!((brezis_gamma(h1, lap) - brezis_gamma(c * h1, c * lap)).abs() <= 1e-14 * brezis_gamma(h1, lap));
        let a = brezis_rhs(&g, c * h1, c * lap);
        prop_assert!((a - c * brezis_rhs(&g, h1, lap)).abs() <= 1e-12 * a);
        let b = agmon_n_rhs(&g, h1, lap, agmon_gamma(h1, lap));
        prop_assert!(b <= agmon_rhs(&g, h1, lap) * (1.0 + 1e-14));
    }
}

#[test]
fn appendix_integrals_on_fifty_pairs() {
    let gammas: Vec<f64> = (0..10).map(|i| 10f64.powf(-2.0 + 0.6 * i as f64)).collect();
    let mut count = 0;
    for (l1, l2) in [(2.0 * PI, 2.0 * PI), (1.0, 3.0), (5.0, 0.5), (2.0 * PI, 4.0), (10.0, 9.0)] {
        let g = GridSpec::new(l1, l2, 8, 8).unwrap();
        for r in check_appendix_integrals(&g, &gammas).unwrap() {
            assert!(r.passed(), "{r:?}");
            count += 1;
        }
    }
    assert_eq!(count, 50);
    assert!(check_appendix_integrals(&grid(), &[0.0]).is_err());
}

#[test]
fn prop1_ingredients_hold_on_random_fields() {
    let g = grid();
    let op = AverageOperator::new(Partition::new(g, 16, 16).unwrap());
    for decay in [1.5, 0.0] {
        let spec = RandomFieldSpec::new(99, 20, decay, 500);
        let r = check_prop1_ingredients(&g, &spec, &op).unwrap();
        assert!(r.passed(), "{:?}", r.violations.first());
        for c in [Check::Poincare, Check::GradA, Check::Interpolation, Check::InterpolationWithOperator] {
            assert_eq!(r.summary(c).unwrap().evaluations, 500);
        }
    }
}

#[test]
fn lowest_mode_is_extremal_for_poincare() {
    let g = GridSpec::new(2.0 * PI, PI, 32, 16).unwrap();
    let u = VelocityField::from_fn(g, |_, _| 0.0, |x, _| x.sin());
    let lambda1 = g.lambda1();
    assert!((u.grad_norm_sq() - lambda1 * u.l2_norm_sq()).abs() < 1e-12 * u.grad_norm_sq());
    assert!((u.lap_norm_sq() - lambda1 * u.grad_norm_sq()).abs() < 1e-12 * u.lap_norm_sq());
    assert!((u.grad_norm_sq() - u.l2_norm() * u.lap_norm()).abs() < 1e-12 * u.grad_norm_sq());
}
