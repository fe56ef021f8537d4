use num_complex::Complex64;

use crate::spectral::ops::NonlinearWorkspace;
use crate::spectral::{nonlinear_term, GridSpec, ScalarField, VelocityField};
use crate::{Error, Result};

/// Time-stepping parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub nu: f64,
    pub dt: f64,
    pub t_end: f64,
    pub picard_tol: f64,
    pub picard_max_iters: usize,
    pub record_every: usize,
    /// When false the advection term is dropped (Stokes flow).
    pub advection: bool,
}

impl SolverConfig {
    pub const DEFAULT_PICARD_TOL: f64 = 1e-12;
    pub const DEFAULT_PICARD_MAX_ITERS: usize = 100;

    pub fn new(nu: f64, dt: f64, t_end: f64) -> Result<Self> {
        let cfg = Self {
            nu,
            dt,
            t_end,
            picard_tol: Self::DEFAULT_PICARD_TOL,
            picard_max_iters: Self::DEFAULT_PICARD_MAX_ITERS,
            record_every: 1,
            advection: true,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidArgument(m.to_string()));
        if !(self.nu > 0.0 && self.nu.is_finite()) {
            return bad("nu must be positive");
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad("dt must be positive");
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return bad("t_end must be non-negative");
        }
        if !(self.picard_tol > 0.0) {
            return bad("picard_tol must be positive");
        }
        if self.picard_max_iters == 0 {
            return bad("picard_max_iters must be at least 1");
        }
        if self.record_every == 0 {
            return bad("record_every must be at least 1");
        }
        self.steps().map(|_| ())
    }

    /// Number of steps to reach `t_end`; `t_end` must be a whole multiple of `dt`.
    pub fn steps(&self) -> Result<usize> {
        let n = (self.t_end / self.dt).round();
        if (n * self.dt - self.t_end).abs() > 1e-9 * self.t_end.max(self.dt) {
            return Err(Error::InvalidArgument(format!(
                "t_end = {} is not a multiple of dt = {}",
                self.t_end, self.dt
            )));
        }
        Ok(n as usize)
    }
}

/// Projected right-hand side `−P[(v·∇)v] − νAv + Pf`.
pub fn rhs(v: &VelocityField, f: &VelocityField, nu: f64) -> Result<VelocityField> {
    v.check_grid(f)?;
    let n = nonlinear_term(v);
    let av = v.stokes_unchecked();
    let pf = f.leray_project();
    pf.sub(&n)?.axpy(-nu, &av)
}

/// Per-step diagnostics of the fixed-point solve.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StepStats {
    pub iterations: usize,
    pub residual: f64,
}

/// Diagonal linear feedback `c_k (target_k − w_k)` treated implicitly.
pub(crate) struct Feedback<'a> {
    pub gain: &'a [f64],
    pub target: &'a VelocityField,
}

/// Implicit-midpoint integrator with the viscous term solved exactly per mode
/// and fixed-point iteration on the remaining terms.
pub struct Integrator {
    grid: GridSpec,
    cfg: SolverConfig,
    half_visc: Vec<f64>,
    ws: NonlinearWorkspace,
    nl1: Vec<Complex64>,
    nl2: Vec<Complex64>,
    last: StepStats,
}

impl Integrator {
    pub fn new(grid: GridSpec, cfg: SolverConfig) -> Result<Self> {
        cfg.validate()?;
        let half_visc = (0..grid.len())
            .map(|i| 0.5 * cfg.nu * grid.wavenumber_sq(i) * cfg.dt)
            .collect();
        Ok(Self {
            grid,
            cfg,
            half_visc,
            ws: NonlinearWorkspace::new(grid),
            nl1: vec![Complex64::default(); grid.len()],
            nl2: vec![Complex64::default(); grid.len()],
            last: StepStats::default(),
        })
    }

    pub fn config(&self) -> &SolverConfig {
        &self.cfg
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    /// Statistics of the most recent step.
    pub fn last_stats(&self) -> StepStats {
        self.last
    }

    /// One step from `v` with the (projected) forcing `f_mid` held at its
    /// midpoint value.
    pub fn step(&mut self, v: &VelocityField, f_mid: &VelocityField) -> Result<VelocityField> {
        self.step_general(v, f_mid, None, None)
    }

    /// Step of `dw/dt = −P[(w·∇)w] − νAw + f + c∘(target − w) + R(w)` where
    /// `c` is a per-mode gain (implicit) and `R` is an explicit remainder
    /// evaluated at the midpoint state inside the fixed-point loop.
    pub(crate) fn step_general(
        &mut self,
        v: &VelocityField,
        f_mid: &VelocityField,
        feedback: Option<Feedback<'_>>,
        mut remainder: Option<&mut dyn FnMut(&VelocityField) -> Result<VelocityField>>,
    ) -> Result<VelocityField> {
        v.check_grid(f_mid)?;
        let g = self.grid;
        if !g.same_domain(v.grid()) {
            return Err(Error::GridMismatch);
        }
        let n = g.len();
        let dt = self.cfg.dt;
        let half_dt = 0.5 * dt;

        // The update is carried as an increment δ = w − v so that rounding
        // only affects the (small) change per step, not the state itself.
        let mut den = vec![0.0; n];
        let mut base = [vec![Complex64::default(); n], vec![Complex64::default(); n]];
        let vc = [v.u1.coeffs(), v.u2.coeffs()];
        let fc = [f_mid.u1.coeffs(), f_mid.u2.coeffs()];
        let tc = feedback
            .as_ref()
            .map(|fb| [fb.target.u1.coeffs(), fb.target.u2.coeffs()]);
        for k in 0..n {
            let c = feedback.as_ref().map_or(0.0, |fb| fb.gain[k]);
            let a = self.half_visc[k] + half_dt * c;
            den[k] = 1.0 + a;
            for d in 0..2 {
                let mut rhs = fc[d][k];
                if let Some(t) = &tc {
                    rhs += t[d][k] * c;
                }
                base[d][k] = (rhs * dt - vc[d][k] * (2.0 * a)) / den[k];
            }
        }

        let v_norm = v.l2_norm();
        let area = g.area();
        let mut delta = [vec![Complex64::default(); n], vec![Complex64::default(); n]];
        let mut next = [vec![Complex64::default(); n], vec![Complex64::default(); n]];
        let mut mid = v.clone();
        for it in 1..=self.cfg.picard_max_iters {
            {
                let (m1, m2) = (mid.u1.coeffs_mut(), mid.u2.coeffs_mut());
                for k in 0..n {
                    m1[k] = vc[0][k] + 0.5 * delta[0][k];
                    m2[k] = vc[1][k] + 0.5 * delta[1][k];
                }
            }
            if self.cfg.advection {
                self.ws.eval(mid.u1.coeffs(), mid.u2.coeffs(), &mut self.nl1, &mut self.nl2);
            } else {
                self.nl1.fill(Complex64::default());
                self.nl2.fill(Complex64::default());
            }
            let extra = match remainder.as_mut() {
                Some(r) => Some(r(&mid)?),
                None => None,
            };
            let mut res = 0.0;
            let mut next_norm = 0.0;
            let nl = [&self.nl1, &self.nl2];
            for d in 0..2 {
                let ec = extra.as_ref().map(|e| if d == 0 { e.u1.coeffs() } else { e.u2.coeffs() });
                for k in 0..n {
                    let mut src = -nl[d][k];
                    if let Some(e) = ec {
                        src += e[k];
                    }
                    let z = base[d][k] + src * (dt / den[k]);
                    res += (den[k] * (delta[d][k] - z)).norm_sqr();
                    next_norm += (vc[d][k] + z).norm_sqr();
                    next[d][k] = z;
                }
            }
            std::mem::swap(&mut delta, &mut next);
            let res = (area * res).sqrt();
            let scale = v_norm.max((area * next_norm).sqrt());
            if res <= self.cfg.picard_tol * scale {
                self.last = StepStats {
                    iterations: it,
                    residual: res,
                };
                let [d1, d2] = delta;
                let out = |vk: &[Complex64], mut dk: Vec<Complex64>| {
                    for (x, y) in dk.iter_mut().zip(vk) {
                        *x += y;
                    }
                    ScalarField::from_coeffs_unchecked(g, dk)
                };
                return Ok(VelocityField {
                    u1: out(vc[0], d1),
                    u2: out(vc[1], d2),
                });
            }
            if !res.is_finite() || it == self.cfg.picard_max_iters {
                return Err(Error::PicardNotConverged {
                    iterations: it,
                    residual: res,
                });
            }
        }
        unreachable!("loop returns on its last iteration")
    }
}

/// One implicit-midpoint step `v⁺ = v + dt·rhs((v + v⁺)/2)` with the forcing
/// fixed at `f_mid`.
///
/// The viscous part is inverted exactly per mode and the advection term is
/// resolved by fixed-point iteration until the residual
/// `‖v⁺ − v − dt·rhs(mid)‖` is below `picard_tol · max(‖v‖, ‖v⁺‖)`.
pub fn implicit_midpoint_step(
    v: &VelocityField,
    f_mid: &VelocityField,
    cfg: &SolverConfig,
) -> Result<VelocityField> {
    let pf = f_mid.leray_project().truncate_band();
    Integrator::new(*v.grid(), *cfg)?.step(v, &pf)
}
