//! Closed-form observer design quantities.
//!
//! With `λ₁ = 4π²/max(ℓ₁, ℓ₂)²`, `C₁² = (1 + λ₁⁻¹)/(2π)` and
//! `C₂ = ‖ℓ‖/√(32π³)`, the admissible resolution is governed by
//!
//! ```text
//! Θ(Γ) = (2π)^{3/2} ν (ν − C₂/(λ₁Γ)) · log^{−1/2}(1 + 4π²κ‖f‖²Γ²/(ν²ℓ₁ℓ₂))
//!        / (C_Ω (4κπ² + κ max(ℓ₁, ℓ₂)²)^{1/2} ‖f‖)
//! ```
//!
//! An averaging operator with `h² < β Θ(Γ_max)` and gain `L = β L̂_∇` (or a
//! point operator with `h < β C_Ω^{1/2} Θ(Γ_max)/θ` and `L = θ L̂_Δ`) gives a
//! converging observer.

use std::f64::consts::PI;
use std::fmt::Write as _;

use crate::quadrature::{golden_section_max, logspace};
use crate::{Error, Result};

/// Interpolation constant in `‖∇v‖² ≤ C_∇ ‖v‖ ‖Av‖`; equal to one on the
/// periodic domain by Cauchy-Schwarz on Fourier coefficients.
pub const C_NABLA: f64 = 1.0;

/// Share of `κ‖f‖²/ν²` allotted to the `1/T` forcing term when sizing `T`.
const WINDOW_FORCING_SHARE: f64 = 0.05;

/// Points of the coarse logarithmic scan preceding the golden-section refinement.
pub const ARGMAX_SCAN_POINTS: usize = 2000;
/// The scan covers `[Γ₀(1 + 1e−6), Γ₀·1e6]` where `Γ₀` is the zero of `Θ`.
pub const ARGMAX_SPAN: f64 = 1e6;
/// Relative tolerance on `Γ` of the golden-section refinement.
pub const ARGMAX_TOL: f64 = 1e-6;

/// Inputs of the design formulas.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DesignInputs {
    pub nu: f64,
    pub ell1: f64,
    pub ell2: f64,
    /// `‖f‖_{L²}`.
    pub f_l2: f64,
    pub kappa: f64,
    pub c_omega: f64,
    pub h: f64,
    pub beta: f64,
    /// Multiplier `θ > 1` of `L̂_Δ` for point operators.
    pub theta_factor: f64,
    /// `‖∇u₀‖_{L²}`, used only to size `t⋆`.
    pub grad_u0_l2: f64,
}

impl DesignInputs {
    pub fn validate(&self) -> Result<()> {
        let pos = [
            ("nu", self.nu),
            ("ell1", self.ell1),
            ("ell2", self.ell2),
            ("f_l2", self.f_l2),
            ("c_omega", self.c_omega),
            ("h", self.h),
            ("beta", self.beta),
            ("theta_factor", self.theta_factor),
        ];
        for (name, v) in pos {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidArgument(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.kappa > 1.0 && self.kappa.is_finite()) {
            return Err(Error::InvalidArgument(format!("kappa must exceed 1, got {}", self.kappa)));
        }
        if self.beta > 1.0 {
            return Err(Error::InvalidArgument(format!("beta must not exceed 1, got {}", self.beta)));
        }
        if !(self.grad_u0_l2 >= 0.0 && self.grad_u0_l2.is_finite()) {
            return Err(Error::InvalidArgument("grad_u0_l2 must be non-negative".into()));
        }
        Ok(())
    }

    pub fn lambda1(&self) -> f64 {
        let l = self.ell1.max(self.ell2);
        4.0 * PI * PI / (l * l)
    }

    fn log_arg_coeff(&self) -> f64 {
        4.0 * PI * PI * self.kappa * self.f_l2 * self.f_l2 / (self.nu * self.nu * self.ell1 * self.ell2)
    }

    /// `log(1 + 4π²κ‖f‖²Γ²/(ν²ℓ₁ℓ₂))`.
    pub fn log_factor(&self, gamma: f64) -> f64 {
        (self.log_arg_coeff() * gamma * gamma).ln_1p()
    }

    /// `Γ₀ = C₂/(λ₁ν)`, the zero of `Θ`.
    pub fn gamma_zero(&self) -> f64 {
        constants(self).2 / (self.lambda1() * self.nu)
    }
}

/// `(λ₁, C₁, C₂)`.
pub fn constants(inputs: &DesignInputs) -> (f64, f64, f64) {
    let lambda1 = inputs.lambda1();
    let c1 = ((1.0 + 1.0 / lambda1) / (2.0 * PI)).sqrt();
    let c2 = inputs.ell1.hypot(inputs.ell2) / (32.0 * PI.powi(3)).sqrt();
    (lambda1, c1, c2)
}

pub(crate) fn theta_tt_raw(f2: f64, nu: f64, lambda1: f64, grad0_sq: f64, t: f64, window: f64) -> f64 {
    2.0 * f2 / (window * nu.powi(3) * lambda1)
        + f2 / (nu * nu)
        + 2.0 / (window * nu) * (-lambda1 * nu * t).exp() * grad0_sq
}

/// `θ_{t,T} = 2‖f‖²/(Tν³λ₁) + ‖f‖²/ν² + (2/(Tν)) e^{−λ₁νt} ‖∇u₀‖²`.
pub fn theta_tt(inputs: &DesignInputs, t: f64, window: f64) -> Result<f64> {
    if !(t >= 0.0 && window > 0.0) {
        return Err(Error::InvalidArgument("need t ≥ 0 and T > 0".into()));
    }
    Ok(theta_tt_raw(
        inputs.f_l2.powi(2),
        inputs.nu,
        inputs.lambda1(),
        inputs.grad_u0_l2.powi(2),
        t,
        window,
    ))
}

/// Window `T` and earliest start `t⋆` with `θ_{t⋆,T} ≤ κ‖f‖²/ν²`.
///
/// `T` makes the `1/T` forcing term equal to `0.05κ‖f‖²/ν²` (or half of the
/// available margin `κ − 1` when that is smaller); `t⋆` then follows by
/// inverting the exponential term.
pub fn window_and_start(inputs: &DesignInputs) -> (f64, f64) {
    let (nu, lambda1, k) = (inputs.nu, inputs.lambda1(), inputs.kappa);
    let share = if WINDOW_FORCING_SHARE * k < k - 1.0 {
        WINDOW_FORCING_SHARE * k
    } else {
        0.5 * (k - 1.0)
    };
    let window = 2.0 / (share * nu * lambda1);
    let margin = k - 1.0 - share;
    let f2 = inputs.f_l2.powi(2);
    let g2 = inputs.grad_u0_l2.powi(2);
    let t_star = if g2 == 0.0 {
        0.0
    } else {
        ((2.0 * nu * g2 / (window * margin * f2)).ln() / (lambda1 * nu)).max(0.0)
    };
    (window, t_star)
}

/// `Θ(Γ)`; negative below `Γ₀`.
pub fn theta_of_gamma(inputs: &DesignInputs, gamma: f64) -> Result<f64> {
    if !(gamma > 0.0) {
        return Err(Error::InvalidArgument(format!("gamma must be positive, got {gamma}")));
    }
    Ok(theta_unchecked(inputs, gamma))
}

fn theta_unchecked(inputs: &DesignInputs, gamma: f64) -> f64 {
    let (lambda1, _, c2) = constants(inputs);
    let (nu, k) = (inputs.nu, inputs.kappa);
    let lmax = inputs.ell1.max(inputs.ell2);
    let num = (2.0 * PI).powf(1.5) * nu * (nu - c2 / (lambda1 * gamma));
    let den = inputs.c_omega * (4.0 * k * PI * PI + k * lmax * lmax).sqrt() * inputs.f_l2;
    num / (inputs.log_factor(gamma).sqrt() * den)
}

/// Outcome of the `Θ` maximisation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ArgmaxOutcome {
    Found {
        gamma_max: f64,
        theta_max: f64,
        /// The maximiser sits on the edge of the scanned bracket.
        at_edge: bool,
    },
    /// `Θ` is not positive and finite anywhere on the bracket.
    Infeasible { best_gamma: f64, best_value: f64 },
}

impl ArgmaxOutcome {
    pub fn found(&self) -> Option<(f64, f64)> {
        match *self {
            ArgmaxOutcome::Found {
                gamma_max,
                theta_max,
                ..
            } => Some((gamma_max, theta_max)),
            ArgmaxOutcome::Infeasible { .. } => None,
        }
    }
}

/// Maximises `f` over `[lo, hi]`: logarithmic scan of `points` values, then
/// golden section in `log Γ` between the neighbours of the best sample.
pub fn log_scan_max(f: &dyn Fn(f64) -> f64, lo: f64, hi: f64, points: usize) -> ArgmaxOutcome {
    let grid = logspace(lo, hi, points.max(3));
    let mut best = 0usize;
    let mut best_val = f64::NEG_INFINITY;
    for (i, &g) in grid.iter().enumerate() {
        let v = f(g);
        if v.is_finite() && v > best_val {
            best_val = v;
            best = i;
        }
    }
    if !(best_val > 0.0) {
        return ArgmaxOutcome::Infeasible {
            best_gamma: grid[best],
            best_value: best_val,
        };
    }
    let a = grid[best.saturating_sub(1)].ln();
    let b = grid[(best + 1).min(grid.len() - 1)].ln();
    let (x, fx) = golden_section_max(&|s| f(s.exp()), a, b, ARGMAX_TOL);
    let (gamma_max, theta_max) = if fx >= best_val {
        (x.exp(), fx)
    } else {
        (grid[best], best_val)
    };
    ArgmaxOutcome::Found {
        gamma_max,
        theta_max,
        at_edge: best == 0 || best == grid.len() - 1,
    }
}

/// Maximiser of `Θ` over `[Γ₀(1 + 1e−6), Γ₀·1e6]`.
pub fn argmax_theta(inputs: &DesignInputs) -> ArgmaxOutcome {
    let g0 = inputs.gamma_zero();
    log_scan_max(
        &|g| theta_unchecked(inputs, g),
        g0 * (1.0 + 1e-6),
        g0 * ARGMAX_SPAN,
        ARGMAX_SCAN_POINTS,
    )
}

fn require_feasible(inputs: &DesignInputs, gamma_max: f64) -> Result<()> {
    if !(gamma_max > inputs.gamma_zero()) {
        return Err(Error::InvalidArgument(format!(
            "Γ = {gamma_max} does not exceed the zero Γ₀ = {} of Θ",
            inputs.gamma_zero()
        )));
    }
    Ok(())
}

/// `L̂_∇ = 2(ν − C₂/(λ₁Γ))/(h²C_Ω)`, without the factor `β`.
pub fn gain_l_nabla_hat(inputs: &DesignInputs, gamma_max: f64) -> f64 {
    let (lambda1, _, c2) = constants(inputs);
    2.0 * (inputs.nu - c2 / (lambda1 * gamma_max)) / (inputs.h * inputs.h * inputs.c_omega)
}

/// Gain `L = β L̂_∇` for averaging (gradient-class) operators.
pub fn gain_l_nabla(inputs: &DesignInputs, gamma_max: f64) -> Result<f64> {
    require_feasible(inputs, gamma_max)?;
    Ok(inputs.beta * gain_l_nabla_hat(inputs, gamma_max))
}

/// `L̂_Δ = (κ + κ/λ₁)^{1/2} ‖f‖/(ν√(2π)) · log^{1/2}(1 + 4π²κ‖f‖²Γ²/(ν²ℓ₁ℓ₂))`.
pub fn gain_l_delta_hat(inputs: &DesignInputs, gamma_max: f64) -> f64 {
    let lambda1 = inputs.lambda1();
    let k = inputs.kappa;
    (k + k / lambda1).sqrt() * inputs.f_l2 / (inputs.nu * (2.0 * PI).sqrt())
        * inputs.log_factor(gamma_max).sqrt()
}

/// Gain `L = θ L̂_Δ` for point (Laplacian-class) operators.
pub fn gain_l_delta(inputs: &DesignInputs, gamma_max: f64) -> Result<f64> {
    require_feasible(inputs, gamma_max)?;
    Ok(inputs.theta_factor * gain_l_delta_hat(inputs, gamma_max))
}

/// Operator class of an observation operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperatorClass {
    /// `‖u − Cu‖² ≤ h²C_Ω‖∇u‖²`.
    Gradient,
    /// `‖u − Cu‖² ≤ h²C_Ω‖Δu‖²`.
    Laplacian,
}

/// Largest `h` certified by the detectability condition at `Γ`, with
/// `C_∇ = 1`; zero when the numerator `3ν/4 − C₂/(λ₁Γ)` is not positive.
pub fn detectability_h_bound(inputs: &DesignInputs, gamma: f64, class: OperatorClass) -> f64 {
    let (lambda1, c1, c2) = constants(inputs);
    let nu = inputs.nu;
    let margin = 0.75 * nu - c2 / (lambda1 * gamma);
    if !(margin > 0.0) {
        return 0.0;
    }
    let lead = match class {
        OperatorClass::Gradient => lambda1.sqrt(),
        OperatorClass::Laplacian => 1.0,
    };
    lead * nu * margin
        / (c1
            * C_NABLA
            * inputs.c_omega.sqrt()
            * inputs.kappa.sqrt()
            * inputs.f_l2
            * inputs.log_factor(gamma).sqrt())
}

/// Brezis-based resolution bound of the classical nudging analysis,
/// `ν · C_Ω⁻¹ (3νλ₁(2c·log 2·c^{3/2} + 8c·log(1 + G)) G)⁻¹`, `G = ‖f‖/(λ₁ν²)`.
pub fn azouani_bound(inputs: &DesignInputs, c: f64) -> Result<f64> {
    if !(c > 0.0) {
        return Err(Error::InvalidArgument(format!("c must be positive, got {c}")));
    }
    let lambda1 = inputs.lambda1();
    let nu = inputs.nu;
    let g = inputs.f_l2 / (lambda1 * nu * nu);
    let inner = 2.0 * c * 2f64.ln() * c.powf(1.5) + 8.0 * c * g.ln_1p();
    Ok(nu / (inputs.c_omega * 3.0 * nu * lambda1 * inner * g))
}

/// Brezis constant of the Taylor-Green mode used for the comparison.
pub const BREZIS_C1: f64 = 1.0 / (2.0 * PI);

/// All design quantities for one set of inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct GainReport {
    pub inputs: DesignInputs,
    pub lambda1: f64,
    pub c1: f64,
    pub c2: f64,
    pub c_nabla: f64,
    pub t_star: f64,
    pub window: f64,
    pub theta_tt: f64,
    pub gamma_zero: f64,
    pub argmax: ArgmaxOutcome,
    /// `β Θ(Γ_max)`: averaging operators need `h²` below this.
    pub h2_bound_gradient: f64,
    /// `β C_Ω^{1/2} Θ(Γ_max)/θ`: point operators need `h` below this.
    pub h_bound_laplacian: f64,
    pub l_nabla_hat: f64,
    pub l_nabla: f64,
    pub l_delta_hat: f64,
    pub l_delta: f64,
    pub detect_gamma: f64,
    pub detect_h_bound_gradient: f64,
    pub detect_h_bound_laplacian: f64,
    pub azouani: f64,
    pub log10_ratio: f64,
}

impl GainReport {
    pub fn compute(inputs: &DesignInputs) -> Result<Self> {
        inputs.validate()?;
        let (lambda1, c1, c2) = constants(inputs);
        let (window, t_star) = window_and_start(inputs);
        let theta_tt = theta_tt(inputs, t_star, window)?;
        let argmax = argmax_theta(inputs);
        let g0 = inputs.gamma_zero();
        let azouani = azouani_bound(inputs, BREZIS_C1)?;

        // The detectability bound has its own zero at 4Γ₀/3.
        let detect = log_scan_max(
            &|g| detectability_h_bound(inputs, g, OperatorClass::Gradient),
            g0 * 4.0 / 3.0 * (1.0 + 1e-6),
            g0 * ARGMAX_SPAN,
            ARGMAX_SCAN_POINTS,
        );
        let detect_gamma = match detect {
            ArgmaxOutcome::Found { gamma_max, .. } => gamma_max,
            ArgmaxOutcome::Infeasible { best_gamma, .. } => best_gamma,
        };

        let nan = f64::NAN;
        let (h2b, hb, lnh, ln, ldh, ld, ratio) = match argmax.found() {
            Some((gm, tm)) => (
                inputs.beta * tm,
                inputs.beta * inputs.c_omega.sqrt() * tm / inputs.theta_factor,
                gain_l_nabla_hat(inputs, gm),
                gain_l_nabla(inputs, gm)?,
                gain_l_delta_hat(inputs, gm),
                gain_l_delta(inputs, gm)?,
                (tm / azouani).log10(),
            ),
            None => (nan, nan, nan, nan, nan, nan, nan),
        };
        Ok(Self {
            inputs: *inputs,
            lambda1,
            c1,
            c2,
            c_nabla: C_NABLA,
            t_star,
            window,
            theta_tt,
            gamma_zero: g0,
            argmax,
            h2_bound_gradient: h2b,
            h_bound_laplacian: hb,
            l_nabla_hat: lnh,
            l_nabla: ln,
            l_delta_hat: ldh,
            l_delta: ld,
            detect_gamma,
            detect_h_bound_gradient: detectability_h_bound(inputs, detect_gamma, OperatorClass::Gradient),
            detect_h_bound_laplacian: detectability_h_bound(inputs, detect_gamma, OperatorClass::Laplacian),
            azouani,
            log10_ratio: ratio,
        })
    }

    pub fn gamma_max(&self) -> Option<f64> {
        self.argmax.found().map(|x| x.0)
    }

    pub fn theta_max(&self) -> Option<f64> {
        self.argmax.found().map(|x| x.1)
    }

    /// `h² < β Θ(Γ_max)`.
    pub fn feasible_gradient(&self) -> bool {
        self.inputs.h.powi(2) < self.h2_bound_gradient
    }

    /// `h < β C_Ω^{1/2} Θ(Γ_max)/θ`.
    pub fn feasible_laplacian(&self) -> bool {
        self.inputs.h < self.h_bound_laplacian
    }

    /// Gain for the given class, or `None` when `h` is not certified.
    pub fn certified_gain(&self, class: OperatorClass) -> Option<f64> {
        match class {
            OperatorClass::Gradient if self.feasible_gradient() => Some(self.l_nabla),
            OperatorClass::Laplacian if self.feasible_laplacian() => Some(self.l_delta),
            _ => None,
        }
    }

    /// Ordered `(key, value)` pairs of the report.
    pub fn entries(&self) -> Vec<(&'static str, String)> {
        let i = &self.inputs;
        let f = |x: f64| format!("{x:e}");
        let (gm, tm, edge) = match self.argmax {
            ArgmaxOutcome::Found {
                gamma_max,
                theta_max,
                at_edge,
            } => (f(gamma_max), f(theta_max), at_edge.to_string()),
            ArgmaxOutcome::Infeasible { .. } => ("infeasible".into(), "infeasible".into(), "false".into()),
        };
        vec![
            ("nu", f(i.nu)),
            ("ell1", f(i.ell1)),
            ("ell2", f(i.ell2)),
            ("f_l2", f(i.f_l2)),
            ("kappa", f(i.kappa)),
            ("c_omega", f(i.c_omega)),
            ("h", f(i.h)),
            ("beta", f(i.beta)),
            ("theta_factor", f(i.theta_factor)),
            ("grad_u0_l2", f(i.grad_u0_l2)),
            ("lambda1", f(self.lambda1)),
            ("c1", f(self.c1)),
            ("c2", f(self.c2)),
            ("c_nabla", f(self.c_nabla)),
            ("t_star", f(self.t_star)),
            ("window", f(self.window)),
            ("theta_tT", f(self.theta_tt)),
            ("gamma_zero", f(self.gamma_zero)),
            ("gamma_max", gm),
            ("theta_at_max", tm),
            ("argmax_at_edge", edge),
            ("h2_bound_gradient", f(self.h2_bound_gradient)),
            ("h_bound_laplacian", f(self.h_bound_laplacian)),
            ("feasible_gradient", self.feasible_gradient().to_string()),
            ("feasible_laplacian", self.feasible_laplacian().to_string()),
            ("l_nabla_hat", f(self.l_nabla_hat)),
            ("l_nabla", f(self.l_nabla)),
            ("l_delta_hat", f(self.l_delta_hat)),
            ("l_delta", f(self.l_delta)),
            ("detect_gamma", f(self.detect_gamma)),
            ("detect_h_bound_gradient", f(self.detect_h_bound_gradient)),
            ("detect_h_bound_laplacian", f(self.detect_h_bound_laplacian)),
            ("azouani_bound", f(self.azouani)),
            ("log10_ratio", f(self.log10_ratio)),
        ]
    }

    /// Flat `key = value` document.
    pub fn to_key_values(&self) -> String {
        let mut s = String::new();
        for (k, v) in self.entries() {
            let _ = writeln!(s, "{k} = {v}");
        }
        s
    }
}

/// One row of the resolution-bound comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComparisonRow {
    pub nu: f64,
    pub gamma_max: Option<f64>,
    pub theta_max: Option<f64>,
    pub azouani: f64,
    pub log10_ratio: Option<f64>,
}

pub const COMPARISON_HEADER: &str = "nu,gamma_max,theta_max,azouani,log10_ratio,feasible";

/// `Θ(Γ_max)` against the Brezis-based bound (with `c = 1/(2π)`) for each `ν`.
/// Infeasible rows are kept with empty values.
pub fn compare_bounds(inputs: &DesignInputs, nus: &[f64]) -> Result<Vec<ComparisonRow>> {
    nus.iter()
        .map(|&nu| {
            let mut i = *inputs;
            i.nu = nu;
            i.validate()?;
            let az = azouani_bound(&i, BREZIS_C1)?;
            let found = argmax_theta(&i).found();
            Ok(ComparisonRow {
                nu,
                gamma_max: found.map(|x| x.0),
                theta_max: found.map(|x| x.1),
                azouani: az,
                log10_ratio: found.map(|x| (x.1 / az).log10()),
            })
        })
        .collect()
}

pub fn comparison_csv(rows: &[ComparisonRow]) -> String {
    let mut s = String::from(COMPARISON_HEADER);
    s.push('\n');
    let opt = |x: Option<f64>| x.map(|v| format!("{v:.17e}")).unwrap_or_default();
    for r in rows {
        let _ = writeln!(
            s,
            "{:.17e},{},{},{:.17e},{},{}",
            r.nu,
            opt(r.gamma_max),
            opt(r.theta_max),
            r.azouani,
            opt(r.log10_ratio),
            r.theta_max.is_some()
        );
    }
    s
}
