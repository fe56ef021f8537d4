use std::f64::consts::PI;

use nseobs_core::gain::{
    argmax_theta, azouani_bound, compare_bounds, comparison_csv, detectability_h_bound,
    gain_l_nabla, theta_of_gamma, theta_tt, window_and_start, ArgmaxOutcome, DesignInputs,
    GainReport, OperatorClass, BREZIS_C1,
};
use proptest::prelude::*;

fn reference_point() -> DesignInputs {
    DesignInputs {
        nu: 0.01,
        ell1: 2.0 * PI,
        ell2: 2.0 * PI,
        f_l2: 0.1,
        kappa: 1.1,
        c_omega: 1.0 / (4.0 * PI * PI),
        h: 2.0 * PI / 150.0,
        beta: 0.96,
        theta_factor: 1.5,
        grad_u0_l2: 1.0,
    }
}

/// Independent transcription of Θ(Γ) for the oracle.
fn theta_oracle(i: &DesignInputs, g: f64) -> f64 {
    let lambda1 = 4.0 * PI * PI / i.ell1.max(i.ell2).powi(2);
    let ell = (i.ell1 * i.ell1 + i.ell2 * i.ell2).sqrt();
    let numer = (2.0 * PI).powf(1.5) * i.nu * (i.nu - ell / ((32.0 * PI.powi(3)).sqrt() * lambda1 * g));
    let log = (1.0 + 4.0 * PI * PI * i.kappa * i.f_l2 * i.f_l2 * g * g / (i.nu * i.nu * i.ell1 * i.ell2)).ln();
    numer / log.sqrt()
        / (i.c_omega * (4.0 * i.kappa * PI * PI + i.kappa * i.ell1.max(i.ell2).powi(2)).sqrt() * i.f_l2)
}

/// Maximum over a 1e5-point logarithmic grid on the same bracket.
fn fine_grid_max(i: &DesignInputs) -> (f64, f64) {
    let lambda1 = 4.0 * PI * PI / i.ell1.max(i.ell2).powi(2);
    let ell = (i.ell1 * i.ell1 + i.ell2 * i.ell2).sqrt();
    let g0 = ell / ((32.0 * PI.powi(3)).sqrt() * lambda1 * i.nu);
    let (a, b) = ((g0 * (1.0 + 1e-6)).ln(), (g0 * 1e6).ln());
    let n = 100_000;
    (0..n)
        .map(|k| {
            let g = (a + (b - a) * k as f64 / (n - 1) as f64).exp();
            (g, theta_oracle(i, g))
        })
        .fold((0.0, f64::NEG_INFINITY), |acc, x| if x.1 > acc.1 { x } else { acc })
}

#[test]
fn theta_matches_independent_transcription() {
    let i = reference_point();
    for g in [0.5, 3.0, 71.0, 550.0, 1e4] {
        let a = theta_of_gamma(&i, g).unwrap();
        let b = theta_oracle(&i, g);
        assert!((a - b).abs() <= 1e-13 * b.abs());
    }
}

#[test]
fn argmax_dominates_fine_grid_at_reference_point() {
    let i = reference_point();
    let (gm, tm) = argmax_theta(&i).found().unwrap();
    let (og, ot) = fine_grid_max(&i);
    assert!(tm >= ot * (1.0 - 1e-3), "{tm} vs {ot}");
    assert!((tm - ot).abs() <= 1e-3 * ot);
    assert!((gm / og - 1.0).abs() < 0.05, "{gm} vs {og}");
    assert!(gm > i.gamma_zero());
}

#[test]
fn reference_point_is_feasible_for_averages() {
    let r = GainReport::compute(&reference_point()).unwrap();
    let tm = r.theta_max().unwrap();
    assert!(tm > 0.0);
    assert!(r.inputs.h.powi(2) < 0.96 * tm);
    assert!(r.feasible_gradient());
    assert!(r.l_nabla > 0.0 && r.l_nabla.is_finite());
}

#[test]
fn forcing_growth_lowers_the_maximum() {
    let mut i = reference_point();
    let mut last = f64::INFINITY;
    for f in [0.05, 0.1, 0.2, 0.4, 0.8] {
        i.f_l2 = f;
        let (_, tm) = argmax_theta(&i).found().unwrap();
        assert!(tm < last);
        last = tm;
    }
}

#[test]
fn azouani_closed_form() {
    let mut i = reference_point();
    i.c_omega = 0.3;
    i.nu = 0.05;
    let c = 0.2;
    let g = i.f_l2 / (i.nu * i.nu);
    let expect = i.nu / (0.3 * 3.0 * i.nu * (2.0 * c * 2f64.ln() * c.powf(1.5) + 8.0 * c * (1.0 + g).ln()) * g);
    assert!((azouani_bound(&i, c).unwrap() - expect).abs() < 1e-14 * expect);
    assert!(azouani_bound(&i, 0.0).is_err());
}

#[test]
fn azouani_grows_without_bound_as_forcing_vanishes() {
    let mut i = reference_point();
    let mut last = 0.0;
    for f in [1e-1, 1e-2, 1e-3, 1e-4, 1e-6] {
        i.f_l2 = f;
        let v = azouani_bound(&i, BREZIS_C1).unwrap();
        assert!(v > last);
        last = v;
    }
    assert!(last > 1e4);
}

#[test]
fn comparison_sweep_dominates() {
    let i = reference_point();
    let nus: Vec<f64> = (0..25).map(|k| 10f64.powf(-6.0 + 5.0 * k as f64 / 24.0)).collect();
    let rows = compare_bounds(&i, &nus).unwrap();
    assert_eq!(rows.len(), 25);
    for r in &rows {
        assert!(r.log10_ratio.unwrap() > 0.0, "nu = {}", r.nu);
    }
    assert!(rows[0].log10_ratio.unwrap() >= 1.0);
    let csv = comparison_csv(&rows);
    assert_eq!(csv.lines().count(), 26);
    assert_eq!(compare_bounds(&i, &[1e-3]).unwrap().len(), 1);
}

#[test]
fn detectability_bound_increases_with_viscosity() {
    let i = reference_point();
    let g = 50.0;
    let mut j = i;
    j.nu = 0.012;
    let a = detectability_h_bound(&i, g, OperatorClass::Gradient);
    let b = detectability_h_bound(&j, g, OperatorClass::Gradient);
    assert!(a > 0.0 && b > a);
}

#[test]
fn start_time_is_smallest_admissible() {
    let mut i = reference_point();
    i.grad_u0_l2 = 50.0;
    let (w, t) = window_and_start(&i);
    let target = i.kappa * i.f_l2.powi(2) / i.nu.powi(2);
    assert!(theta_tt(&i, t, w).unwrap() <= target * (1.0 + 1e-12));
    assert!(theta_tt(&i, 0.99 * t, w).unwrap() > target);
}

proptest! {
    #![proptest_config(ProptestConfig { failure_persistence: None, ..ProptestConfig::with_cases(100) })]

    #[test]
    fn feasible_inputs_give_positive_gain(
        nu in 1e-3f64..0.5,
        f in 1e-3f64..2.0,
        ell in 0.5f64..10.0,
        kappa in 1.01f64..1.9,
        beta in 0.1f64..1.0,
        frac in 0.05f64..0.99,
    ) {
        let mut i = reference_point();
        i.nu = nu; i.f_l2 = f; i.ell1 = ell; i.ell2 = ell * 0.8; i.kappa = kappa; i.beta = beta;
        let (gm, tm) = argmax_theta(&i).found().unwrap();
        // choose h inside the certified region
        i.h = (frac * beta * tm).sqrt();
        let r = GainReport::compute(&i).unwrap();
        prop_assert!(r.feasible_gradient());
        prop_assert!(gain_l_nabla(&i, gm).unwrap() > 0.0);
    }

    #[test]
    fn theta_window_is_monotone(t in 0.0f64..50.0, dt in 0.0f64..5.0, w in 0.1f64..100.0, dw in 0.0f64..50.0) {
        let i = reference_point();
        prop_assert!(theta_tt(&i, t + dt, w).unwrap() <= theta_tt(&i, t, w).unwrap());
        prop_assert!(theta_tt(&i, t, w + dw).unwrap() <= theta_tt(&i, t, w).unwrap());
    }
}

#[test]
fn infeasible_outcome_is_a_value() {
    // Θ is positive right above its zero, so the scan always finds a maximiser.
    match argmax_theta(&reference_point()) {
        ArgmaxOutcome::Found { at_edge, .. } => assert!(!at_edge),
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn print_reference_values() {
    let r = GainReport::compute(&reference_point()).unwrap();
    println!("{}", r.to_key_values());
    let rows = compare_bounds(&reference_point(), &[1e-6, 1e-1]).unwrap();
    println!("{rows:?}");
}
