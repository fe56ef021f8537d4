//! Implementation of the experiment commands.

use std::fmt::Write as _;
use std::sync::Arc;

use anyhow::{anyhow, bail, Context, Result};
use rayon::prelude::*;

use nseobs_core::gain::{
    compare_bounds, comparison_csv, theta_of_gamma, DesignInputs, GainReport, OperatorClass,
};
use nseobs_core::inequality::{check_appendix_integrals, run_audit, AppendixRow, AuditSelection, InequalityReport};
use nseobs_core::observation::{AverageOperator, ObservationOperator, Partition, PointOperator};
use nseobs_core::observer::{run_twin, ErrorNorm, ErrorTrace, ObserverConfig, ERROR_TRACE_HEADER};
use nseobs_core::solver::{
    bounded_perturbation, energy_audit, peaks_initial_condition, simulate_with, taylor_green, Forcing,
    Integrator, PerturbationSpec, SolverConfig,
};
use nseobs_core::spectral::{random_field, snapshot, RandomFieldSpec};
use nseobs_core::{GridSpec, VelocityField};

use crate::config::{ExperimentConfig, GainSetting, InitialKind, ObserverStart, OperatorChoice};
use crate::manifest::{OutputDir, RunManifest};
use crate::plot::{Plot, Scale, Series};

/// Maximiser of `Θ` reported for the reference operating point.
pub const REFERENCE_GAMMA_MAX: f64 = 71.0;
/// Gain reported for the reference operating point.
pub const REFERENCE_GAIN: f64 = 410.6;

pub const SENSITIVITY_HEADER: &str = "t,e1,e2";
pub const THETA_HEADER: &str = "gamma,theta";
pub const APPENDIX_HEADER: &str = "ell1,ell2,gamma,i1,i1_polar,i1_bound,i1_without_jacobian,i2,i2_quadrature,passed";

const THETA_CURVE_POINTS: usize = 400;

pub fn logspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.ln(), hi.ln());
            (0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect()
        }
    }
}

pub fn initial_condition(cfg: &ExperimentConfig, grid: GridSpec) -> Result<VelocityField> {
    let s = &cfg.solver;
    let u = match s.initial {
        InitialKind::Peaks => peaks_initial_condition(grid).scale(s.initial_amplitude),
        InitialKind::TaylorGreen => taylor_green(grid, s.initial_amplitude),
        InitialKind::Snapshot => {
            let v = snapshot::load(s.initial_path.as_ref())
                .with_context(|| format!("solver.initial_path: loading {:?}", s.initial_path))?;
            if v.grid().n1 == grid.n1 && v.grid().n2 == grid.n2 {
                v
            } else {
                v.resample(grid.n1, grid.n2).context("solver.initial_path: resampling")?
            }
        }
    };
    Ok(u.leray_project())
}

pub fn truth_forcing(cfg: &ExperimentConfig, grid: GridSpec) -> Result<Forcing> {
    cfg.forcing_spec().realize(grid).context("forcing")
}

fn step_failure(t: f64, e: nseobs_core::Error) -> anyhow::Error {
    anyhow!(nseobs_core::Error::StepFailure {
        time: t,
        source: Box::new(e),
    })
}

fn csv_f64(x: f64) -> String {
    format!("{x:.17e}")
}

pub fn simulate(cfg: &ExperimentConfig, out: &mut OutputDir, m: &mut RunManifest) -> Result<()> {
    let grid = cfg.grid_spec()?;
    let solver = cfg.solver_config()?;
    let forcing = truth_forcing(cfg, grid)?;
    let u0 = initial_condition(cfg, grid)?;
    let steps = solver.steps()?;
    let every = cfg.solver.snapshot_every;
    let mut final_state = None;
    let mut write_error = None;
    let rec = simulate_with(&u0, &forcing, &solver, |k, _, v| {
        let due = (every > 0 && k % every == 0) || k == steps;
        if due && write_error.is_none() {
            let bytes = snapshot::encode(v)?;
            let name = if k == steps {
                "state_final.nsef".to_string()
            } else {
                format!("snapshots/state_{k:06}.nsef")
            };
            if let Err(e) = out.write(&name, &bytes) {
                write_error = Some(e);
            }
        }
        if k == steps {
            final_state = Some(v.clone());
        }
        Ok(())
    })?;
    if let Some(e) = write_error {
        return Err(e);
    }
    out.write("trajectory.csv", rec.to_csv().as_bytes())?;
    let plot = Plot::new("Solution norms", "t", "norm", Scale::Linear, Scale::Log)
        .with(Series::new("L2", rec.times.clone(), rec.l2.clone()))
        .with(Series::new("grad L2", rec.times.clone(), rec.grad_l2.clone()))
        .with(Series::new("Laplacian L2", rec.times.clone(), rec.lap_l2.clone()));
    out.write("trajectory.svg", plot.to_svg().as_bytes())?;
    let u = final_state.context("no final state")?;
    let audit = energy_audit(&rec, forcing.l2_norm(), solver.nu, &grid);
    m.metric("steps", steps);
    m.metric_f64("t_end", solver.t_end);
    m.metric_f64("final_l2", u.l2_norm());
    m.metric_f64("final_h1", u.h1_norm());
    m.metric("energy_audit_passed", audit.passed());
    Ok(())
}

/// Relative divergence of two perturbed trajectories from a reference one.
#[derive(Debug, Clone, PartialEq)]
pub struct SensitivityTrace {
    pub nu: f64,
    pub times: Vec<f64>,
    pub e1: Vec<f64>,
    pub e2: Vec<f64>,
}

impl SensitivityTrace {
    pub fn to_csv(&self) -> String {
        let mut s = String::from(SENSITIVITY_HEADER);
        s.push('\n');
        for i in 0..self.times.len() {
            let _ = writeln!(s, "{},{},{}", csv_f64(self.times[i]), csv_f64(self.e1[i]), csv_f64(self.e2[i]));
        }
        s
    }
}

/// Lockstep integration of the reference run (`u0`, `f`), the run with
/// perturbed initial state (`u0 + η`, `f`) and the run with perturbed state
/// and input (`u0 + η`, `g`).
pub fn sensitivity_run(
    u0: &VelocityField,
    eta: &VelocityField,
    f: &Forcing,
    g: &Forcing,
    solver: &SolverConfig,
) -> Result<SensitivityTrace> {
    let grid = *u0.grid();
    let steps = solver.steps()?;
    let mut ints = [
        Integrator::new(grid, *solver)?,
        Integrator::new(grid, *solver)?,
        Integrator::new(grid, *solver)?,
    ];
    let perturbed = u0.add(eta)?.leray_project();
    let mut states = [u0.leray_project(), perturbed.clone(), perturbed];
    let mut trace = SensitivityTrace {
        nu: solver.nu,
        times: Vec::new(),
        e1: Vec::new(),
        e2: Vec::new(),
    };
    let record = |trace: &mut SensitivityTrace, t: f64, s: &[VelocityField; 3]| -> Result<()> {
        let r = s[0].l2_norm();
        trace.times.push(t);
        trace.e1.push(s[0].sub(&s[1])?.l2_norm() / r);
        trace.e2.push(s[0].sub(&s[2])?.l2_norm() / r);
        Ok(())
    };
    record(&mut trace, 0.0, &states)?;
    let (f_steady, g_steady) = (f.is_steady().then(|| f.at(0.0)), g.is_steady().then(|| g.at(0.0)));
    for k in 1..=steps {
        let t_mid = (k as f64 - 0.5) * solver.dt;
        let fm = f_steady.clone().unwrap_or_else(|| f.at(t_mid));
        let gm = g_steady.clone().unwrap_or_else(|| g.at(t_mid));
        let inputs = [&fm, &fm, &gm];
        ints.par_iter_mut()
            .zip(states.par_iter_mut())
            .zip(inputs.par_iter())
            .try_for_each(|((int, s), fk)| -> nseobs_core::Result<()> {
                *s = int.step(s, fk)?;
                Ok(())
            })
            .map_err(|e| step_failure(t_mid - 0.5 * solver.dt, e))?;
        if k % solver.record_every == 0 || k == steps {
            record(&mut trace, k as f64 * solver.dt, &states)?;
        }
    }
    Ok(trace)
}

fn nu_tag(nu: f64) -> String {
    format!("{nu:e}").replace('.', "p").replace('-', "m")
}

pub fn sensitivity(cfg: &ExperimentConfig, out: &mut OutputDir, m: &mut RunManifest) -> Result<()> {
    let grid = cfg.grid_spec()?;
    let sw = &cfg.sweep;
    let u0 = initial_condition(cfg, grid)?;
    let f = truth_forcing(cfg, grid)?;
    let mut input = PerturbationSpec::new(sw.input_amplitude, sw.input_rate, cfg.seed.wrapping_add(2));
    input.band = sw.perturbation_band;
    let g = cfg.forcing_spec().with_perturbation(input).realize(grid).context("forcing")?;
    let eta = bounded_perturbation(grid, sw.ic_amplitude, cfg.seed, sw.perturbation_band)?;
    let solvers = sw
        .sensitivity_nus
        .iter()
        .map(|&nu| cfg.solver_config_with_nu(nu))
        .collect::<Result<Vec<_>>>()?;
    let traces = solvers
        .par_iter()
        .map(|s| sensitivity_run(&u0, &eta, &f, &g, s))
        .collect::<Result<Vec<_>>>()?;
    let mut plot = Plot::new("Relative perturbation error", "t", "relative L2 error", Scale::Linear, Scale::Log);
    for tr in &traces {
        let tag = nu_tag(tr.nu);
        out.write(&format!("sensitivity_nu{tag}.csv"), tr.to_csv().as_bytes())?;
        plot = plot
            .with(Series::new(format!("e1 nu={}", tr.nu), tr.times.clone(), tr.e1.clone()))
            .with(Series::new(format!("e2 nu={}", tr.nu), tr.times.clone(), tr.e2.clone()));
        let last = tr.times.len() - 1;
        m.metric_f64(&format!("nu{tag}_e1_initial"), tr.e1[0]);
        m.metric_f64(&format!("nu{tag}_e1_final"), tr.e1[last]);
        m.metric_f64(&format!("nu{tag}_e2_initial"), tr.e2[0]);
        m.metric_f64(&format!("nu{tag}_e2_final"), tr.e2[last]);
        m.metric_f64(&format!("nu{tag}_e1_growth_orders"), (tr.e1[last] / tr.e1[0]).log10());
    }
    out.write("sensitivity.svg", plot.to_svg().as_bytes())?;
    Ok(())
}

/// Builds the configured operator of one kind; point operators are
/// calibrated on seeded random band-limited fields.
pub fn build_operator(
    cfg: &ExperimentConfig,
    grid: GridSpec,
    kind: OperatorChoice,
) -> Result<Arc<dyn ObservationOperator>> {
    let o = &cfg.observer;
    let part = Partition::new(grid, o.nx, o.ny).context("observer.nx/ny")?;
    Ok(match kind {
        OperatorChoice::Average => Arc::new(AverageOperator::new(part)),
        OperatorChoice::Point => {
            let (b1, b2) = grid.band_limits();
            let spec = RandomFieldSpec::new(cfg.seed.wrapping_add(4), b1.min(b2) as usize, 1.5, o.calibration_samples);
            let samples = (0..o.calibration_samples as u64)
                .into_par_iter()
                .map(|id| random_field(grid, &spec, id))
                .collect::<nseobs_core::Result<Vec<_>>>()?;
            Arc::new(PointOperator::calibrated(part, &samples).context("observer.calibration_samples")?)
        }
        OperatorChoice::Both => bail!("observer.operator: expected a single operator kind"),
    })
}

fn operator_kinds(choice: OperatorChoice) -> Vec<OperatorChoice> {
    match choice {
        OperatorChoice::Both => vec![OperatorChoice::Average, OperatorChoice::Point],
        k => vec![k],
    }
}

fn kind_name(kind: OperatorChoice) -> &'static str {
    match kind {
        OperatorChoice::Average => "average",
        OperatorChoice::Point => "point",
        OperatorChoice::Both => "both",
    }
}

pub fn design_inputs(
    cfg: &ExperimentConfig,
    op: &dyn ObservationOperator,
    forcing: &Forcing,
    u0: &VelocityField,
) -> DesignInputs {
    cfg.design_inputs(forcing.l2_norm(), op.c_omega(), op.h(), u0.grad_norm())
}

fn class_gain(report: &GainReport, class: OperatorClass) -> f64 {
    match class {
        OperatorClass::Gradient => report.l_nabla,
        OperatorClass::Laplacian => report.l_delta,
    }
}

/// Key-value report with the deviation from the reference operating point.
pub fn gain_document(report: &GainReport, class: OperatorClass) -> String {
    let mut s = report.to_key_values();
    let dev = |x: Option<f64>, r: f64| x.map(|v| format!("{:e}", (v - r) / r)).unwrap_or_else(|| "n/a".into());
    let _ = writeln!(s, "operator_class = {class:?}");
    let _ = writeln!(s, "certified_gain = {}", report.certified_gain(class).map(|g| format!("{g:e}")).unwrap_or_else(|| "infeasible".into()));
    let _ = writeln!(s, "reference_gamma_max = {REFERENCE_GAMMA_MAX:e}");
    let _ = writeln!(s, "gamma_max_relative_deviation = {}", dev(report.gamma_max(), REFERENCE_GAMMA_MAX));
    let _ = writeln!(s, "reference_gain = {REFERENCE_GAIN:e}");
    let _ = writeln!(s, "gain_relative_deviation = {}", dev(Some(class_gain(report, class)), REFERENCE_GAIN));
    s
}

fn infeasibility(report: &GainReport, class: OperatorClass) -> String {
    match (report.gamma_max(), class) {
        (None, _) => "Θ has no positive maximum (argmax infeasible)".to_string(),
        (Some(_), OperatorClass::Gradient) => format!(
            "h² = {:e} is not below β·Θ(Γ_max) = {:e}",
            report.inputs.h.powi(2),
            report.h2_bound_gradient
        ),
        (Some(_), OperatorClass::Laplacian) => format!(
            "h = {:e} is not below the Laplacian-class bound {:e}",
            report.inputs.h, report.h_bound_laplacian
        ),
    }
}

pub fn observe(cfg: &ExperimentConfig, out: &mut OutputDir, m: &mut RunManifest) -> Result<()> {
    let grid = cfg.grid_spec()?;
    let solver = cfg.solver_config()?;
    let u0 = initial_condition(cfg, grid)?;
    let truth = truth_forcing(cfg, grid)?;
    let input = if cfg.observer.known_input {
        truth.clone()
    } else {
        cfg.forcing_spec()
            .with_perturbation(cfg.input_mismatch())
            .realize(grid)
            .context("observer input")?
    };
    let z0 = match cfg.observer.z0 {
        ObserverStart::Zero => VelocityField::zeros(grid),
        ObserverStart::Random => {
            let (b1, b2) = grid.band_limits();
            let spec = RandomFieldSpec::new(cfg.seed.wrapping_add(3), b1.min(b2) as usize, 1.0, 1);
            let z = random_field(grid, &spec, 0)?;
            z.scale(cfg.observer.z0_scale * u0.h1_norm() / z.h1_norm())
        }
    };
    let kinds = operator_kinds(cfg.observer.operator);
    let mut setups = Vec::new();
    for kind in &kinds {
        let name = kind_name(*kind);
        let op = build_operator(cfg, grid, *kind)?;
        let gain = match cfg.observer.gain {
            GainSetting::Value(l) => l,
            GainSetting::Keyword(_) => {
                let report = GainReport::compute(&design_inputs(cfg, op.as_ref(), &truth, &u0))
                    .with_context(|| format!("gain design for {}", op.label()))?;
                out.write(&format!("gain_report_{name}.txt"), gain_document(&report, op.class()).as_bytes())?;
                match report.certified_gain(op.class()) {
                    Some(l) => l,
                    None => bail!(
                        "automatic gain infeasible for {}: {} (see gain_report_{name}.txt)",
                        op.label(),
                        infeasibility(&report, op.class())
                    ),
                }
            }
        };
        m.metric_f64(&format!("{name}_gain"), gain);
        m.metric_f64(&format!("{name}_c_omega"), op.c_omega());
        let mut ocfg = ObserverConfig::new(op, gain, input.clone(), solver).context("observer")?;
        ocfg.error_norm = cfg.observer.error_norm.into();
        setups.push((name, ocfg));
    }
    let traces = setups
        .par_iter()
        .map(|(_, c)| run_twin(&u0, &z0, &truth, c).map_err(anyhow::Error::from))
        .collect::<Result<Vec<ErrorTrace>>>()?;
    let norm = cfg.observer.error_norm;
    let mut plot = Plot::new(
        "Relative estimation error",
        "t",
        &format!("relative {} error", ErrorNorm::from(norm).name()),
        Scale::Linear,
        Scale::Log,
    );
    for ((name, c), tr) in setups.iter().zip(&traces) {
        out.write(&format!("observer_{name}.csv"), tr.to_csv().as_bytes())?;
        plot = plot.with(Series::new(c.operator.label(), tr.times.clone(), tr.rel_err.clone()));
        let last = tr.len() - 1;
        m.metric_f64(&format!("{name}_rel_err_initial"), tr.rel_err[0]);
        m.metric_f64(&format!("{name}_rel_err_final"), tr.rel_err[last]);
        m.metric_f64(&format!("{name}_orders_of_decay"), tr.orders_of_decay());
        m.metric(&format!("{name}_max_picard_iterations"), tr.max_picard_iterations);
    }
    m.metric("error_csv_header", ERROR_TRACE_HEADER);
    out.write("observer.svg", plot.to_svg().as_bytes())?;
    Ok(())
}

fn theta_curve(inputs: &DesignInputs) -> Result<(Vec<f64>, Vec<f64>)> {
    let g0 = inputs.gamma_zero();
    let gammas = logspace(g0 * (1.0 + 1e-3), g0 * 1e6, THETA_CURVE_POINTS);
    let thetas = gammas.iter().map(|&g| theta_of_gamma(inputs, g)).collect::<nseobs_core::Result<Vec<_>>>()?;
    Ok((gammas, thetas))
}

pub fn gain_report(cfg: &ExperimentConfig, out: &mut OutputDir, m: &mut RunManifest) -> Result<()> {
    let grid = cfg.grid_spec()?;
    let u0 = initial_condition(cfg, grid)?;
    let truth = truth_forcing(cfg, grid)?;
    let mut plot = Plot::new("Theta(Gamma)", "Gamma", "Theta", Scale::Log, Scale::Log);
    for kind in operator_kinds(cfg.observer.operator) {
        let name = kind_name(kind);
        let op = build_operator(cfg, grid, kind)?;
        let inputs = design_inputs(cfg, op.as_ref(), &truth, &u0);
        let report = GainReport::compute(&inputs).context("gain design")?;
        let class = op.class();
        out.write(&format!("gain_report_{name}.txt"), gain_document(&report, class).as_bytes())?;
        let (gammas, thetas) = theta_curve(&inputs)?;
        let mut csv = String::from(THETA_HEADER);
        csv.push('\n');
        for (g, t) in gammas.iter().zip(&thetas) {
            let _ = writeln!(csv, "{},{}", csv_f64(*g), csv_f64(*t));
        }
        out.write(&format!("theta_{name}.csv"), csv.as_bytes())?;
        plot = plot.with(Series::new(op.label(), gammas, thetas));
        if let Some((gm, tm)) = report.gamma_max().zip(report.theta_max()) {
            m.metric_f64(&format!("{name}_gamma_max"), gm);
            m.metric_f64(&format!("{name}_theta_max"), tm);
            m.metric_f64(&format!("{name}_gamma_max_relative_deviation"), (gm - REFERENCE_GAMMA_MAX) / REFERENCE_GAMMA_MAX);
        }
        let l = class_gain(&report, class);
        m.metric_f64(&format!("{name}_gain"), l);
        m.metric_f64(&format!("{name}_gain_relative_deviation"), (l - REFERENCE_GAIN) / REFERENCE_GAIN);
        m.metric(&format!("{name}_feasible"), report.certified_gain(class).is_some());
        m.metric_f64(&format!("{name}_c_omega"), inputs.c_omega);
        m.metric_f64(&format!("{name}_h"), inputs.h);
    }
    out.write("theta.svg", plot.to_svg().as_bytes())?;
    Ok(())
}

pub fn compare_bounds_cmd(cfg: &ExperimentConfig, out: &mut OutputDir, m: &mut RunManifest) -> Result<()> {
    let grid = cfg.grid_spec()?;
    let u0 = initial_condition(cfg, grid)?;
    let truth = truth_forcing(cfg, grid)?;
    let kind = operator_kinds(cfg.observer.operator)[0];
    let op = build_operator(cfg, grid, kind)?;
    let inputs = design_inputs(cfg, op.as_ref(), &truth, &u0);
    let sw = &cfg.sweep;
    let nus = logspace(sw.nu_min, sw.nu_max, sw.points);
    let rows = compare_bounds(&inputs, &nus).context("bound comparison")?;
    out.write("compare_bounds.csv", comparison_csv(&rows).as_bytes())?;
    let theta: Vec<f64> = rows.iter().map(|r| r.theta_max.unwrap_or(f64::NAN)).collect();
    let az: Vec<f64> = rows.iter().map(|r| r.azouani).collect();
    let plot = Plot::new("Resolution bounds", "nu", "bound", Scale::Log, Scale::Log)
        .with(Series::new("Theta(Gamma_max)", nus.clone(), theta))
        .with(Series::new("Brezis-based bound", nus.clone(), az));
    out.write("compare_bounds.svg", plot.to_svg().as_bytes())?;
    let dominates = rows.iter().all(|r| r.theta_max.is_some_and(|t| t > r.azouani));
    m.metric("rows", rows.len());
    m.metric("theta_dominates_everywhere", dominates);
    if let Some(r) = rows.first() {
        m.metric_f64("log10_ratio_at_nu_min", r.log10_ratio.unwrap_or(f64::NAN));
    }
    m.metric_f64("c_omega", inputs.c_omega);
    Ok(())
}

fn audit_document(decay: f64, r: &InequalityReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "[decay = {decay}]");
    let _ = writeln!(s, "seed = {}", r.seed);
    let _ = writeln!(s, "fields = {}", r.fields);
    let _ = writeln!(s, "gammas = {}", r.gammas.len());
    let _ = writeln!(s, "substitution_deviation = {:e}", r.substitution_deviation);
    for c in &r.summaries {
        let _ = writeln!(
            s,
            "{} evaluations = {} violations = {} worst_relative_margin = {:e}",
            c.check.name(),
            c.evaluations,
            c.violations,
            c.worst_relative_margin
        );
    }
    for n in &r.notices {
        let _ = writeln!(s, "notice = {n}");
    }
    let _ = writeln!(s, "passed = {}", r.passed());
    s
}

fn appendix_csv(rows: &[AppendixRow]) -> String {
    let mut s = String::from(APPENDIX_HEADER);
    s.push('\n');
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{}",
            csv_f64(r.ell1),
            csv_f64(r.ell2),
            csv_f64(r.gamma),
            csv_f64(r.i1),
            csv_f64(r.i1_polar),
            csv_f64(r.i1_bound),
            csv_f64(r.i1_without_jacobian),
            csv_f64(r.i2),
            csv_f64(r.i2_quadrature),
            r.passed()
        );
    }
    s
}

pub fn inequality_audit(cfg: &ExperimentConfig, out: &mut OutputDir, m: &mut RunManifest) -> Result<()> {
    let grid = cfg.inequality_grid()?;
    let sw = &cfg.sweep;
    let gammas = logspace(sw.gamma_min, sw.gamma_max, sw.gamma_points);
    let op = AverageOperator::new(Partition::new(grid, sw.inequality_nx, sw.inequality_nx).context("sweep.inequality_nx")?);
    let mut doc = String::new();
    let mut failed = Vec::new();
    let mut total_violations = 0;
    for (i, &decay) in sw.inequality_decays.iter().enumerate() {
        let spec = RandomFieldSpec::new(cfg.seed, sw.inequality_band, decay, sw.inequality_count);
        let report = run_audit(&grid, &spec, &gammas, Some(&op), AuditSelection::ALL)
            .with_context(|| format!("inequality audit (decay {decay})"))?;
        doc.push_str(&audit_document(decay, &report));
        doc.push('\n');
        out.write(&format!("inequality_violations_{i}.csv"), report.violations_csv().as_bytes())?;
        total_violations += report.violations.len();
        m.metric_f64(&format!("decay{i}_substitution_deviation"), report.substitution_deviation);
        if !report.passed() {
            failed.push(format!("decay {decay}"));
        }
    }
    let rows = if sw.appendix_gammas > 0 {
        check_appendix_integrals(&grid, &logspace(sw.gamma_min, sw.gamma_max, sw.appendix_gammas))?
    } else {
        Vec::new()
    };
    let appendix_failures = rows.iter().filter(|r| !r.passed()).count();
    let _ = writeln!(doc, "[appendix]\nrows = {}\nfailures = {appendix_failures}", rows.len());
    out.write("appendix_integrals.csv", appendix_csv(&rows).as_bytes())?;
    out.write("inequality_report.txt", doc.as_bytes())?;
    m.metric("fields_per_spectrum", sw.inequality_count);
    m.metric("violations", total_violations);
    m.metric("appendix_failures", appendix_failures);
    if appendix_failures > 0 {
        failed.push("appendix integrals".into());
    }
    if !failed.is_empty() {
        bail!("inequality audit failed for {} (see inequality_report.txt)", failed.join(", "));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn logspace_endpoints() {
        let v = logspace(1e-6, 1e-1, 25);
        assert_eq!(v.len(), 25);
        assert!((v[0] - 1e-6).abs() < 1e-20 && (v[24] - 1e-1).abs() < 1e-15);
        assert!(v.windows(2).all(|w| w[1] > w[0]));
        assert!(logspace(1.0, 2.0, 0).is_empty());
    }

    #[test]
    fn nu_tags_are_file_safe() {
        assert_eq!(nu_tag(0.01), "1em2");
        assert_eq!(nu_tag(0.1), "1em1");
        assert_eq!(nu_tag(0.025), "2p5em2");
    }

    #[test]
    fn zero_perturbation_gives_zero_divergence() {
        let grid = GridSpec::square(2.0 * PI, 16).unwrap();
        let u0 = peaks_initial_condition(grid).leray_project();
        let f = Forcing::steady(VelocityField::zeros(grid));
        let eta = VelocityField::zeros(grid);
        let s = SolverConfig::new(0.05, 0.01, 0.1).unwrap();
        let tr = sensitivity_run(&u0, &eta, &f, &f, &s).unwrap();
        assert_eq!(tr.times.len(), 11);
        assert!(tr.e1.iter().chain(&tr.e2).all(|e| *e == 0.0));
    }
}
