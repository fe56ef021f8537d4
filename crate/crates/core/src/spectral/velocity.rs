use num_complex::Complex64;

use super::{GridSpec, ScalarField};
use crate::{Error, Result};

/// Default refinement factor for sampled `L∞` norms.
pub const DEFAULT_LINF_OVERSAMPLING: usize = 4;

/// Relative divergence above which a field is treated as not solenoidal.
pub(crate) const SOLENOIDAL_TOL: f64 = 1e-10;

/// Relative mean above which a field is treated as not mean-free.
pub(crate) const MEAN_TOL: f64 = 1e-12;

/// Two-component real periodic vector field.
#[derive(Debug, Clone, PartialEq)]
pub struct VelocityField {
    pub u1: ScalarField,
    pub u2: ScalarField,
}

/// Norms of a velocity field. `linf` is the maximum of the pointwise
/// Euclidean norm over a refined sampling grid, hence a lower bound on the
/// true supremum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormReport {
    pub l2: f64,
    pub grad_l2: f64,
    pub h1: f64,
    pub lap_l2: f64,
    pub linf: f64,
    pub linf_oversampling: usize,
}

impl VelocityField {
    pub fn new(u1: ScalarField, u2: ScalarField) -> Result<Self> {
        u1.check_grid(&u2)?;
        Ok(Self { u1, u2 })
    }

    pub fn zeros(grid: GridSpec) -> Self {
        Self {
            u1: ScalarField::zeros(grid),
            u2: ScalarField::zeros(grid),
        }
    }

    pub fn from_fn(
        grid: GridSpec,
        f1: impl Fn(f64, f64) -> f64,
        f2: impl Fn(f64, f64) -> f64,
    ) -> Self {
        Self {
            u1: ScalarField::from_fn(grid, f1),
            u2: ScalarField::from_fn(grid, f2),
        }
    }

    pub fn from_physical(grid: GridSpec, s1: &[f64], s2: &[f64]) -> Result<Self> {
        Ok(Self {
            u1: ScalarField::from_physical(grid, s1)?,
            u2: ScalarField::from_physical(grid, s2)?,
        })
    }

    /// `u = (∂ψ/∂y, −∂ψ/∂x)`.
    pub fn from_streamfunction(psi: &ScalarField) -> Self {
        Self {
            u1: psi.dy(),
            u2: psi.dx().scale(-1.0),
        }
    }

    pub fn grid(&self) -> &GridSpec {
        self.u1.grid()
    }

    pub fn check_grid(&self, other: &VelocityField) -> Result<()> {
        self.u1.check_grid(&other.u1)
    }

    pub fn to_physical(&self, oversample: usize) -> Result<(Vec<f64>, Vec<f64>)> {
        Ok((self.u1.to_physical(oversample)?, self.u2.to_physical(oversample)?))
    }

    pub fn eval(&self, x: f64, y: f64) -> (f64, f64) {
        (self.u1.eval(x, y), self.u2.eval(x, y))
    }

    pub fn mean(&self) -> (f64, f64) {
        (self.u1.mean(), self.u2.mean())
    }

    /// Mean below `1e−12` of the largest coefficient.
    pub fn is_zero_mean(&self) -> bool {
        let (a, b) = self.mean();
        let scale = self.u1.max_coeff().max(self.u2.max_coeff());
        a.hypot(b) <= MEAN_TOL * scale
    }

    /// `∂u₁/∂x + ∂u₂/∂y`.
    pub fn divergence(&self) -> ScalarField {
        self.u1.dx().add(&self.u2.dy()).expect("components share a grid")
    }

    /// Vorticity `∂u₂/∂x − ∂u₁/∂y`.
    pub fn curl(&self) -> ScalarField {
        self.u2.dx().sub(&self.u1.dy()).expect("components share a grid")
    }

    /// `max_k |k·û_k|` divided by `(Σ |k|²|û_k|²)^{1/2}`; zero for the zero field.
    pub fn relative_divergence(&self) -> f64 {
        let g = *self.grid();
        let (a, b) = (self.u1.coeffs(), self.u2.coeffs());
        let mut worst = 0.0f64;
        let mut scale = 0.0f64;
        for idx in 0..g.len() {
            let (k1, k2) = g.wavevector(idx);
            worst = worst.max((a[idx] * k1 + b[idx] * k2).norm());
            scale += g.wavenumber_sq(idx) * (a[idx].norm_sqr() + b[idx].norm_sqr());
        }
        if scale == 0.0 {
            0.0
        } else {
            worst / scale.sqrt()
        }
    }

    pub fn is_solenoidal(&self) -> bool {
        self.relative_divergence() <= SOLENOIDAL_TOL
    }

    pub(crate) fn require_solenoidal(&self) -> Result<()> {
        let divergence = self.relative_divergence();
        if divergence > SOLENOIDAL_TOL {
            return Err(Error::NotSolenoidal { divergence });
        }
        Ok(())
    }

    /// Leray projection onto zero-mean divergence-free fields:
    /// `û ← û − k (k·û)/|k|²`, mean mode removed.
    pub fn leray_project(&self) -> Self {
        let mut out = self.clone();
        leray_in_place(&mut out);
        out
    }

    /// Stokes operator `A = −Δ` on divergence-free fields (`û ← |k|² û`).
    pub fn stokes_apply(&self) -> Result<Self> {
        self.require_solenoidal()?;
        Ok(self.stokes_unchecked())
    }

    pub(crate) fn stokes_unchecked(&self) -> Self {
        Self {
            u1: self.u1.laplacian().scale(-1.0),
            u2: self.u2.laplacian().scale(-1.0),
        }
    }

    /// `(u, v)_{L²}`.
    pub fn inner(&self, other: &VelocityField) -> Result<f64> {
        Ok(self.u1.inner(&other.u1)? + self.u2.inner(&other.u2)?)
    }

    /// `((u, v)) = (∇u, ∇v)_{L²}`.
    pub fn grad_inner(&self, other: &VelocityField) -> Result<f64> {
        self.check_grid(other)?;
        let g = *self.grid();
        let mut s = 0.0;
        for (u, v) in [(&self.u1, &other.u1), (&self.u2, &other.u2)] {
            for (idx, (a, b)) in u.coeffs().iter().zip(v.coeffs()).enumerate() {
                s += g.wavenumber_sq(idx) * (a * b.conj()).re;
            }
        }
        Ok(g.area() * s)
    }

    fn weighted_sq(&self, power: i32) -> f64 {
        let g = *self.grid();
        let mut s = 0.0;
        for u in [&self.u1, &self.u2] {
            for (idx, c) in u.coeffs().iter().enumerate() {
                let w = if power == 0 {
                    1.0
                } else {
                    g.wavenumber_sq(idx).powi(power)
                };
                s += w * c.norm_sqr();
            }
        }
        g.area() * s
    }

    pub fn l2_norm_sq(&self) -> f64 {
        self.weighted_sq(0)
    }

    pub fn l2_norm(&self) -> f64 {
        self.l2_norm_sq().sqrt()
    }

    pub fn grad_norm_sq(&self) -> f64 {
        self.weighted_sq(1)
    }

    pub fn grad_norm(&self) -> f64 {
        self.grad_norm_sq().sqrt()
    }

    pub fn lap_norm_sq(&self) -> f64 {
        self.weighted_sq(2)
    }

    pub fn lap_norm(&self) -> f64 {
        self.lap_norm_sq().sqrt()
    }

    pub fn h1_norm(&self) -> f64 {
        (self.l2_norm_sq() + self.grad_norm_sq()).sqrt()
    }

    /// Maximum pointwise Euclidean norm on the grid refined by `oversample`.
    pub fn linf_sampled(&self, oversample: usize) -> Result<f64> {
        let (a, b) = self.to_physical(oversample)?;
        Ok(a.iter()
            .zip(&b)
            .map(|(x, y)| x.hypot(*y))
            .fold(0.0, f64::max))
    }

    pub fn norms(&self, oversample: usize) -> Result<NormReport> {
        let l2 = self.l2_norm_sq();
        let grad = self.grad_norm_sq();
        Ok(NormReport {
            l2: l2.sqrt(),
            grad_l2: grad.sqrt(),
            h1: (l2 + grad).sqrt(),
            lap_l2: self.lap_norm(),
            linf: self.linf_sampled(oversample)?,
            linf_oversampling: oversample,
        })
    }

    pub fn truncate_band(&self) -> Self {
        Self {
            u1: self.u1.truncate_band(),
            u2: self.u2.truncate_band(),
        }
    }

    pub fn scale(&self, a: f64) -> Self {
        Self {
            u1: self.u1.scale(a),
            u2: self.u2.scale(a),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        Ok(Self {
            u1: self.u1.add(&other.u1)?,
            u2: self.u2.add(&other.u2)?,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        Ok(Self {
            u1: self.u1.sub(&other.u1)?,
            u2: self.u2.sub(&other.u2)?,
        })
    }

    /// `self + a·other`.
    pub fn axpy(&self, a: f64, other: &Self) -> Result<Self> {
        self.check_grid(other)?;
        let mut out = self.clone();
        for (dst, src) in [
            (out.u1.coeffs_mut(), other.u1.coeffs()),
            (out.u2.coeffs_mut(), other.u2.coeffs()),
        ] {
            for (d, s) in dst.iter_mut().zip(src) {
                *d += s * a;
            }
        }
        Ok(out)
    }

    pub fn resample(&self, n1: usize, n2: usize) -> Result<Self> {
        Ok(Self {
            u1: self.u1.resample(n1, n2)?,
            u2: self.u2.resample(n1, n2)?,
        })
    }
}

pub(crate) fn leray_in_place(v: &mut VelocityField) {
    let g = *v.grid();
    let VelocityField { u1, u2 } = v;
    leray_coeffs(&g, u1.coeffs_mut(), u2.coeffs_mut());
}

pub(crate) fn leray_coeffs(g: &GridSpec, a: &mut [Complex64], b: &mut [Complex64]) {
    a[0] = Complex64::default();
    b[0] = Complex64::default();
    for idx in 1..g.len() {
        let (k1, k2) = g.wavevector(idx);
        let kk = k1 * k1 + k2 * k2;
        if kk == 0.0 {
            continue;
        }
        let d = (a[idx] * k1 + b[idx] * k2) / kk;
        a[idx] -= d * k1;
        b[idx] -= d * k2;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn tg(n: usize) -> VelocityField {
        let g = GridSpec::square(2.0 * PI, n).unwrap();
        VelocityField::from_fn(g, |x, y| -x.cos() * y.sin(), |x, y| x.sin() * y.cos())
    }

    #[test]
    fn taylor_green_norms() {
        let v = tg(16);
        let r = v.norms(4).unwrap();
        assert!((r.l2 - PI * 2f64.sqrt()).abs() < 1e-12);
        assert!((r.grad_l2 - 2.0 * PI).abs() < 1e-12);
        assert!((r.lap_l2 - 2.0 * PI * 2f64.sqrt()).abs() < 1e-12);
        assert!((r.linf - 1.0).abs() < 1e-12);
        assert!((r.h1 * r.h1 - r.l2 * r.l2 - r.grad_l2 * r.grad_l2).abs() < 1e-12 * r.h1 * r.h1);
    }

    #[test]
    fn gradient_is_annihilated() {
        let g = GridSpec::new(2.0, 3.0, 16, 16).unwrap();
        let p = ScalarField::from_fn(g, |x, y| {
            (2.0 * PI * x / 2.0).sin() + (2.0 * PI * y / 3.0).cos()
        });
        let v = VelocityField::new(p.dx(), p.dy()).unwrap();
        assert!(v.l2_norm() > 1.0);
        assert!(v.leray_project().l2_norm() < 1e-13);
    }

    #[test]
    fn taylor_green_is_stokes_eigenfield() {
        let v = tg(16);
        assert!(v.leray_project().sub(&v).unwrap().l2_norm() < 1e-13);
        let av = v.stokes_apply().unwrap();
        assert!(av.sub(&v.scale(2.0)).unwrap().l2_norm() < 1e-12);
    }

    #[test]
    fn stokes_rejects_compressible_input() {
        let g = GridSpec::square(1.0, 8).unwrap();
        let v = VelocityField::from_fn(g, |x, _| (2.0 * PI * x).sin(), |_, _| 0.0);
        assert!(matches!(v.stokes_apply(), Err(Error::NotSolenoidal { .. })));
    }

    #[test]
    fn streamfunction_velocity_is_solenoidal_with_matching_curl() {
        let g = GridSpec::new(2.0, 1.0, 16, 16).unwrap();
        let psi = ScalarField::from_fn(g, |x, y| (PI * x).sin() * (2.0 * PI * y).cos());
        let v = VelocityField::from_streamfunction(&psi);
        assert!(v.relative_divergence() < 1e-15);
        // curl(ψ_y, −ψ_x) = −Δψ
        let w = v.curl().add(&psi.laplacian()).unwrap();
        assert!(w.l2_norm() < 1e-12);
    }
}
