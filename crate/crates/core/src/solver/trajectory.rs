use std::fmt::Write as _;
use std::path::PathBuf;

use super::{Forcing, Integrator, SolverConfig};
use crate::spectral::VelocityField;
use crate::{Error, Result};

pub const TRAJECTORY_HEADER: &str = "t,l2,grad_l2,h1,lap_l2";

/// Norm history of a simulated trajectory.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrajectoryRecord {
    pub times: Vec<f64>,
    pub l2: Vec<f64>,
    pub grad_l2: Vec<f64>,
    pub h1: Vec<f64>,
    pub lap_l2: Vec<f64>,
    pub snapshots: Vec<PathBuf>,
}

impl TrajectoryRecord {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn push(&mut self, t: f64, v: &VelocityField) {
        let l2 = v.l2_norm_sq();
        let g = v.grad_norm_sq();
        self.times.push(t);
        self.l2.push(l2.sqrt());
        self.grad_l2.push(g.sqrt());
        self.h1.push((l2 + g).sqrt());
        self.lap_l2.push(v.lap_norm());
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::with_capacity(96 * (self.len() + 1));
        s.push_str(TRAJECTORY_HEADER);
        s.push('\n');
        for i in 0..self.len() {
            let _ = writeln!(
                s,
                "{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}",
                self.times[i], self.l2[i], self.grad_l2[i], self.h1[i], self.lap_l2[i]
            );
        }
        s
    }
}

/// Integrates from `v0` to `cfg.t_end`, recording norms every
/// `cfg.record_every` steps and at the final time.
pub fn simulate(v0: &VelocityField, forcing: &Forcing, cfg: &SolverConfig) -> Result<TrajectoryRecord> {
    simulate_with(v0, forcing, cfg, |_, _, _| Ok(()))
}

/// [`simulate`] with a callback invoked on every state, including the
/// initial one, as `(step, t, state)`.
pub fn simulate_with(
    v0: &VelocityField,
    forcing: &Forcing,
    cfg: &SolverConfig,
    mut on_state: impl FnMut(usize, f64, &VelocityField) -> Result<()>,
) -> Result<TrajectoryRecord> {
    v0.check_grid(forcing.base())?;
    v0.require_solenoidal()?;
    if !v0.is_zero_mean() {
        let (a, b) = v0.mean();
        return Err(Error::NonzeroMean { mean: a.hypot(b) });
    }
    let steps = cfg.steps()?;
    let mut integrator = Integrator::new(*v0.grid(), *cfg)?;
    let mut rec = TrajectoryRecord::default();
    // Clears round-off left in the mean and divergence of sampled fields.
    let mut v = v0.leray_project();
    rec.push(0.0, &v);
    on_state(0, 0.0, &v)?;
    let steady = forcing.is_steady().then(|| forcing.at(0.0));
    for k in 1..=steps {
        let t_mid = (k as f64 - 0.5) * cfg.dt;
        let t = k as f64 * cfg.dt;
        let f = match &steady {
            Some(f) => f.clone(),
            None => forcing.at(t_mid),
        };
        v = integrator.step(&v, &f).map_err(|e| Error::StepFailure {
            time: t - cfg.dt,
            source: Box::new(e),
        })?;
        if k % cfg.record_every == 0 || k == steps {
            rec.push(t, &v);
        }
        on_state(k, t, &v)?;
    }
    Ok(rec)
}
