use std::fmt::Write as _;
use std::str::FromStr;
use std::sync::Arc;

use crate::observation::ObservationOperator;
use crate::solver::integrator::Feedback;
use crate::solver::{Forcing, Integrator, SolverConfig, StepStats};
use crate::spectral::{VelocityField, DEFAULT_LINF_OVERSAMPLING};
use crate::{Error, Result};

pub const ERROR_TRACE_HEADER: &str = "t,err_l2,err_grad,err_h1,err_linf,obs_err,rel_err";

/// Norm used for the relative error column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ErrorNorm {
    L2,
    #[default]
    H1,
}

impl FromStr for ErrorNorm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "l2" => Ok(Self::L2),
            "h1" => Ok(Self::H1),
            _ => Err(Error::InvalidArgument(format!("unknown error norm {s:?} (expected l2 or h1)"))),
        }
    }
}

impl ErrorNorm {
    pub fn name(self) -> &'static str {
        match self {
            Self::L2 => "l2",
            Self::H1 => "h1",
        }
    }

    pub fn of(self, v: &VelocityField) -> f64 {
        match self {
            Self::L2 => v.l2_norm(),
            Self::H1 => v.h1_norm(),
        }
    }
}

/// Observer setup: measurement operator, scalar gain `L`, the observer's
/// input model `g` and the shared time stepping.
#[derive(Clone)]
pub struct ObserverConfig {
    pub operator: Arc<dyn ObservationOperator>,
    pub gain: f64,
    pub input: Forcing,
    pub solver: SolverConfig,
    pub error_norm: ErrorNorm,
    /// Oversampling factor of the sampled `L∞` error.
    pub linf_oversampling: usize,
}

impl ObserverConfig {
    pub fn new(
        operator: Arc<dyn ObservationOperator>,
        gain: f64,
        input: Forcing,
        solver: SolverConfig,
    ) -> Result<Self> {
        let cfg = Self {
            operator,
            gain,
            input,
            solver,
            error_norm: ErrorNorm::default(),
            linf_oversampling: DEFAULT_LINF_OVERSAMPLING,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gain > 0.0 && self.gain.is_finite()) {
            return Err(Error::InvalidArgument(format!("observer gain must be positive, got {}", self.gain)));
        }
        if self.operator.grid() != self.input.base().grid() {
            return Err(Error::GridMismatch);
        }
        if self.linf_oversampling == 0 {
            return Err(Error::InvalidArgument("linf_oversampling must be at least 1".into()));
        }
        self.solver.validate()
    }
}

/// Stateful stepper for `dz/dt = −P[(z·∇)z] − νAz + P g + L·P T C(u − z)`.
///
/// The diagonal part of the injection is treated implicitly together with
/// the viscous term; the off-diagonal (aliasing) part is evaluated at the
/// midpoint inside the fixed-point loop.
pub struct Observer {
    cfg: ObserverConfig,
    integrator: Integrator,
    feedback_gain: Vec<f64>,
    steady_input: Option<VelocityField>,
}

impl Observer {
    pub fn new(cfg: ObserverConfig) -> Result<Self> {
        cfg.validate()?;
        let integrator = Integrator::new(*cfg.operator.grid(), cfg.solver)?;
        let feedback_gain = cfg.operator.diagonal_symbol().into_iter().map(|s| cfg.gain * s).collect();
        let steady_input = cfg.input.is_steady().then(|| cfg.input.at(0.0));
        Ok(Self {
            cfg,
            integrator,
            feedback_gain,
            steady_input,
        })
    }

    pub fn config(&self) -> &ObserverConfig {
        &self.cfg
    }

    pub fn last_stats(&self) -> StepStats {
        self.integrator.last_stats()
    }

    /// Advances `z` from `t` to `t + dt` given the reference states at both
    /// ends of the step.
    pub fn step(
        &mut self,
        z: &VelocityField,
        u_now: &VelocityField,
        u_next: &VelocityField,
        t: f64,
    ) -> Result<VelocityField> {
        let g_mid = match &self.steady_input {
            Some(g) => g.clone(),
            None => self.cfg.input.at(t + 0.5 * self.cfg.solver.dt),
        };
        let u_mid = u_now.add(u_next)?.scale(0.5);
        let feedback = Feedback {
            gain: &self.feedback_gain,
            target: &u_mid,
        };
        if self.cfg.operator.aliasing_free() {
            return self.integrator.step_general(z, &g_mid, Some(feedback), None);
        }
        let op = Arc::clone(&self.cfg.operator);
        let l = self.cfg.gain;
        let diag = &self.feedback_gain;
        let mut remainder = |z_mid: &VelocityField| -> Result<VelocityField> {
            let e = u_mid.sub(z_mid)?;
            let full = op.inject(&e)?.scale(l);
            full.sub(&apply_diagonal(&e, diag))
        };
        self.integrator
            .step_general(z, &g_mid, Some(feedback), Some(&mut remainder))
    }
}

fn apply_diagonal(v: &VelocityField, d: &[f64]) -> VelocityField {
    let mut out = v.clone();
    for c in [out.u1.coeffs_mut(), out.u2.coeffs_mut()] {
        for (x, s) in c.iter_mut().zip(d) {
            *x *= *s;
        }
    }
    out
}

/// Single observer step (builds a fresh [`Observer`]).
pub fn observer_step(
    z: &VelocityField,
    u_now: &VelocityField,
    u_next: &VelocityField,
    t: f64,
    cfg: &ObserverConfig,
) -> Result<VelocityField> {
    Observer::new(cfg.clone())?.step(z, u_now, u_next, t)
}

/// Estimation-error history of a twin run.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ErrorTrace {
    pub times: Vec<f64>,
    pub err_l2: Vec<f64>,
    pub err_grad: Vec<f64>,
    pub err_h1: Vec<f64>,
    pub err_linf: Vec<f64>,
    /// `‖C(u − z)‖_{L²}`.
    pub obs_err: Vec<f64>,
    /// `‖u − z‖ / ‖u‖` in the configured norm.
    pub rel_err: Vec<f64>,
    pub error_norm: ErrorNorm,
    /// Largest fixed-point iteration count of any observer step.
    pub max_picard_iterations: usize,
}

impl ErrorTrace {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn push(&mut self, t: f64, u: &VelocityField, z: &VelocityField, cfg: &ObserverConfig) -> Result<()> {
        let e = u.sub(z)?;
        let grad = e.grad_norm();
        let l2 = e.l2_norm();
        let h1 = e.h1_norm();
        let ne = cfg.error_norm.of(&e);
        let nu = cfg.error_norm.of(u);
        self.times.push(t);
        self.err_l2.push(l2);
        self.err_grad.push(grad);
        self.err_h1.push(h1);
        self.err_linf.push(e.linf_sampled(cfg.linf_oversampling)?);
        self.obs_err.push(cfg.operator.output_norm(&e)?);
        self.rel_err.push(if nu > 0.0 { ne / nu } else { ne });
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::with_capacity(160 * (self.len() + 1));
        s.push_str(ERROR_TRACE_HEADER);
        s.push('\n');
        for i in 0..self.len() {
            let _ = writeln!(
                s,
                "{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}",
                self.times[i],
                self.err_l2[i],
                self.err_grad[i],
                self.err_h1[i],
                self.err_linf[i],
                self.obs_err[i],
                self.rel_err[i]
            );
        }
        s
    }

    /// `log₁₀(rel_err(0) / rel_err(end))`.
    pub fn orders_of_decay(&self) -> f64 {
        match (self.rel_err.first(), self.rel_err.last()) {
            (Some(a), Some(b)) => (a / b).log10(),
            _ => 0.0,
        }
    }

    /// Index of the first record with `t ≥ t0`.
    pub fn index_at(&self, t0: f64) -> usize {
        self.times.partition_point(|&t| t < t0 - 1e-12)
    }

    /// Records after `t0` where `rel_err` increases by more than `slack`
    /// relative to its predecessor or `floor` absolutely, whichever is larger.
    pub fn increases_after(&self, t0: f64, slack: f64, floor: f64) -> Vec<usize> {
        let start = self.index_at(t0).max(1);
        (start..self.len())
            .filter(|&i| self.rel_err[i] - self.rel_err[i - 1] > (slack * self.rel_err[i - 1]).max(floor))
            .collect()
    }
}

/// Advances truth `u` under `truth` and the observer `z` in lockstep.
pub fn run_twin(u0: &VelocityField, z0: &VelocityField, truth: &Forcing, cfg: &ObserverConfig) -> Result<ErrorTrace> {
    run_twin_with(u0, z0, truth, cfg, |_, _, _, _| Ok(()))
}

/// [`run_twin`] with a callback `(step, t, u, z)` on every state pair.
pub fn run_twin_with(
    u0: &VelocityField,
    z0: &VelocityField,
    truth: &Forcing,
    cfg: &ObserverConfig,
    mut on_state: impl FnMut(usize, f64, &VelocityField, &VelocityField) -> Result<()>,
) -> Result<ErrorTrace> {
    cfg.validate()?;
    let grid = *cfg.operator.grid();
    for v in [u0, z0, truth.base()] {
        if v.grid() != &grid {
            return Err(Error::GridMismatch);
        }
    }
    for v in [u0, z0] {
        v.require_solenoidal()?;
        if !v.is_zero_mean() {
            let (a, b) = v.mean();
            return Err(Error::NonzeroMean { mean: a.hypot(b) });
        }
    }
    let sc = cfg.solver;
    let steps = sc.steps()?;
    let mut truth_step = Integrator::new(grid, sc)?;
    let mut observer = Observer::new(cfg.clone())?;
    let mut u = u0.leray_project();
    let mut z = z0.leray_project();
    let mut trace = ErrorTrace {
        error_norm: cfg.error_norm,
        ..ErrorTrace::default()
    };
    trace.push(0.0, &u, &z, cfg)?;
    on_state(0, 0.0, &u, &z)?;
    let steady = truth.is_steady().then(|| truth.at(0.0));
    for k in 1..=steps {
        let t0 = (k - 1) as f64 * sc.dt;
        let t = k as f64 * sc.dt;
        let wrap = |e: Error| Error::StepFailure {
            time: t0,
            source: Box::new(e),
        };
        let f = match &steady {
            Some(f) => f.clone(),
            None => truth.at(t0 + 0.5 * sc.dt),
        };
        let u_next = truth_step.step(&u, &f).map_err(wrap)?;
        z = observer.step(&z, &u, &u_next, t0).map_err(wrap)?;
        u = u_next;
        trace.max_picard_iterations = trace.max_picard_iterations.max(observer.last_stats().iterations);
        if k % sc.record_every == 0 || k == steps {
            trace.push(t, &u, &z, cfg)?;
        }
        on_state(k, t, &u, &z)?;
    }
    Ok(trace)
}
