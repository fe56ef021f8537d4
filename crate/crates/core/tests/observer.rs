use std::f64::consts::PI;
use std::sync::Arc;

use nseobs_core::observation::{AverageOperator, ObservationOperator, Partition, PointOperator};
use nseobs_core::observer::{
    bellman_diagnostic, log_decay_rate, observer_step, run_twin, BellmanThresholds, ErrorNorm, Observer,
    ObserverConfig,
};
use nseobs_core::solver::{
    peaks_initial_condition, ForcingSpec, Integrator, PerturbationSpec, SolverConfig,
};
use nseobs_core::spectral::{random_field, RandomFieldSpec};
use nseobs_core::{GridSpec, VelocityField};

fn grid() -> GridSpec {
    GridSpec::square(2.0 * PI, 32).unwrap()
}

fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        x.sin() / x
    }
}

fn config(op: Arc<dyn ObservationOperator>, gain: f64, input: ForcingSpec, solver: SolverConfig) -> ObserverConfig {
    let g = *op.grid();
    ObserverConfig::new(op, gain, input.realize(g).unwrap(), solver).unwrap()
}

#[test]
fn zero_error_is_a_fixed_point() {
    let g = grid();
    let f = ForcingSpec::kolmogorov(4, 0.5).realize(g).unwrap();
    let solver = SolverConfig::new(0.02, 0.01, 0.01).unwrap();
    let op: Arc<dyn ObservationOperator> = Arc::new(AverageOperator::new(Partition::new(g, 8, 8).unwrap()));
    let cfg = ObserverConfig::new(op, 50.0, f.clone(), solver).unwrap();
    let u = random_field(g, &RandomFieldSpec::new(4, 8, 1.5, 1), 0).unwrap().scale(0.5);
    let u_next = Integrator::new(g, solver).unwrap().step(&u, f.base()).unwrap();
    let z_next = observer_step(&u, &u, &u_next, 0.0, &cfg).unwrap();
    let d = z_next.sub(&u_next).unwrap().l2_norm();
    assert!(d <= 10.0 * solver.picard_tol * u_next.l2_norm(), "{d}");
}

#[test]
fn single_mode_error_decays_by_midpoint_factor() {
    // Stokes limit, zero truth: z obeys ż = −(ν|k|² + L s_k) z per mode with
    // s_k the squared cell-mean factor of the partition.
    let g = grid();
    let (nu, dt, l) = (0.05, 0.01, 20.0);
    let mut solver = SolverConfig::new(nu, dt, dt).unwrap();
    solver.advection = false;
    for (nx, ny) in [(24usize, 24usize), (21, 30)] {
        let op = AverageOperator::new(Partition::new(g, nx, ny).unwrap());
        let cfg = config(Arc::new(op), l, ForcingSpec::zero(), solver);
        let (k1, k2) = (2.0, 1.0);
        let z = VelocityField::from_fn(g, |x, y| (k1 * x + k2 * y).cos(), |x, y| -2.0 * (k1 * x + k2 * y).cos());
        let zero = VelocityField::zeros(g);
        let z_next = observer_step(&z, &zero, &zero, 0.0, &cfg).unwrap();
        let s = (sinc(PI * k1 / nx as f64) * sinc(PI * k2 / ny as f64)).powi(2);
        let rate = nu * (k1 * k1 + k2 * k2) + l * s;
        let factor = (1.0 - 0.5 * rate * dt) / (1.0 + 0.5 * rate * dt);
        let err = z_next.sub(&z.scale(factor)).unwrap().l2_norm();
        assert!(err < 1e-13 * z.l2_norm(), "{nx}x{ny}: {err}");
    }
}

#[test]
fn known_input_observer_converges() {
    let g = grid();
    let forcing = ForcingSpec::kolmogorov(2, 0.2);
    let f = forcing.realize(g).unwrap();
    let mut solver = SolverConfig::new(0.05, 0.01, 4.0).unwrap();
    solver.record_every = 10;
    for op in [
        Arc::new(AverageOperator::new(Partition::new(g, 16, 16).unwrap())) as Arc<dyn ObservationOperator>,
        Arc::new(PointOperator::new(Partition::new(g, 16, 16).unwrap(), 0.1).unwrap()),
    ] {
        let label = op.label();
        let cfg = config(op, 40.0, forcing.clone(), solver);
        let u0 = peaks_initial_condition(g);
        let trace = run_twin(&u0, &VelocityField::zeros(g), &f, &cfg).unwrap();
        assert_eq!(trace.len(), 41);
        assert!(trace.orders_of_decay() > 6.0, "{label}: {:?}", trace.rel_err.last());
        assert!(trace.increases_after(0.5, 0.0, 0.0).is_empty(), "{label}");
        assert!(trace.max_picard_iterations < 30);
        // Observation error and state error vanish together.
        assert!(trace.obs_err.last().unwrap() <= trace.err_l2.last().unwrap());
    }
}

#[test]
fn twin_with_equal_start_stays_exact() {
    let g = grid();
    let forcing = ForcingSpec::kolmogorov(3, 0.3);
    let f = forcing.realize(g).unwrap();
    let solver = SolverConfig::new(0.02, 0.01, 0.5).unwrap();
    let op = Arc::new(AverageOperator::new(Partition::new(g, 12, 12).unwrap()));
    let cfg = config(op, 10.0, forcing, solver);
    let u0 = peaks_initial_condition(g);
    let trace = run_twin(&u0, &u0, &f, &cfg).unwrap();
    assert!(trace.rel_err.iter().all(|&e| e <= 10.0 * solver.picard_tol), "{:?}", trace.rel_err);
}

#[test]
fn unknown_input_error_plateaus() {
    let g = grid();
    let truth = ForcingSpec::kolmogorov(2, 0.2);
    let input = truth.clone().with_perturbation(PerturbationSpec::new(1e-3, 2.0, 9));
    let f = truth.realize(g).unwrap();
    let mut solver = SolverConfig::new(0.05, 0.01, 3.0).unwrap();
    solver.record_every = 10;
    let op = Arc::new(AverageOperator::new(Partition::new(g, 16, 16).unwrap()));
    let cfg = config(op, 40.0, input, solver);
    let trace = run_twin(&peaks_initial_condition(g), &VelocityField::zeros(g), &f, &cfg).unwrap();
    let last = *trace.rel_err.last().unwrap();
    assert!(last < 1e-4 && last > 0.0, "{last}");
}

#[test]
fn twin_runs_are_deterministic() {
    let g = grid();
    let forcing = ForcingSpec::kolmogorov(2, 0.2);
    let f = forcing.realize(g).unwrap();
    let solver = SolverConfig::new(0.05, 0.01, 0.3).unwrap();
    let op = Arc::new(PointOperator::new(Partition::new(g, 10, 10).unwrap(), 0.1).unwrap());
    let mut cfg = config(op, 20.0, forcing, solver);
    cfg.error_norm = ErrorNorm::L2;
    let u0 = peaks_initial_condition(g);
    let a = run_twin(&u0, &VelocityField::zeros(g), &f, &cfg).unwrap().to_csv();
    let b = run_twin(&u0, &VelocityField::zeros(g), &f, &cfg).unwrap().to_csv();
    assert_eq!(a, b);
    assert!(a.starts_with("t,err_l2,err_grad,err_h1,err_linf,obs_err,rel_err\n"));
}

#[test]
fn harvested_traces_agree_with_decay() {
    let g = grid();
    let forcing = ForcingSpec::kolmogorov(2, 0.2);
    let f = forcing.realize(g).unwrap();
    let mut solver = SolverConfig::new(0.05, 0.01, 2.0).unwrap();
    solver.record_every = 5;
    let op = Arc::new(AverageOperator::new(Partition::new(g, 16, 16).unwrap()));
    let trace = run_twin(&peaks_initial_condition(g), &VelocityField::zeros(g), &f, &config(op, 40.0, forcing, solver))
        .unwrap();
    let v: Vec<f64> = trace.err_h1.iter().map(|e| e * e).collect();
    let alpha = log_decay_rate(&trace.times, &v);
    let beta = vec![0.0; v.len()];
    let r = bellman_diagnostic(&trace.times, &v, &alpha, &beta, 0.5, &BellmanThresholds::default()).unwrap();
    assert!(r.all_conditions());
    assert!(r.v_ratio < 1e-6);
}

#[test]
fn config_rejects_bad_gain_and_grids() {
    let g = grid();
    let solver = SolverConfig::new(0.05, 0.01, 0.1).unwrap();
    let op: Arc<dyn ObservationOperator> = Arc::new(AverageOperator::new(Partition::new(g, 4, 4).unwrap()));
    let f = ForcingSpec::zero().realize(g).unwrap();
    assert!(ObserverConfig::new(op.clone(), 0.0, f.clone(), solver).is_err());
    let other = ForcingSpec::zero().realize(GridSpec::square(2.0 * PI, 16).unwrap()).unwrap();
    assert!(ObserverConfig::new(op.clone(), 1.0, other, solver).is_err());
    assert!(Observer::new(ObserverConfig::new(op, 1.0, f, solver).unwrap()).is_ok());
    assert_eq!("h1".parse::<ErrorNorm>().unwrap(), ErrorNorm::H1);
    assert!("linf".parse::<ErrorNorm>().is_err());
}
