use std::f64::consts::PI;

use crate::quadrature::adaptive_simpson;
use crate::spectral::GridSpec;
use crate::{Error, Result};

pub const APPENDIX_QUAD_TOL: f64 = 1e-10;

/// Disk integral `∫_{|x|≤γ} dx / (ℓ₁ℓ₂(1 + 4π²|x/ℓ|²))` reduced to
/// `∫₀^γ 2πr dr / ((ℓ₁² + 4π²r²)(ℓ₂² + 4π²r²))^{1/2}` by integrating the
/// angle in closed form.
pub fn i1_radial(ell1: f64, ell2: f64, gamma: f64) -> Result<f64> {
    let f = |r: f64| 2.0 * PI * r / ((ell1 * ell1 + 4.0 * PI * PI * r * r) * (ell2 * ell2 + 4.0 * PI * PI * r * r)).sqrt();
    adaptive_simpson(&f, 0.0, gamma, APPENDIX_QUAD_TOL * (1.0 + i1_bound(ell1, ell2, gamma)))
}

/// Angular integrals use the periodic trapezoid rule, which converges
/// geometrically for smooth periodic integrands.
const ANGULAR_POINTS: usize = 4096;

fn periodic_trapezoid(f: &dyn Fn(f64) -> f64) -> f64 {
    let h = 2.0 * PI / ANGULAR_POINTS as f64;
    (0..ANGULAR_POINTS).map(|i| f(i as f64 * h)).sum::<f64>() * h
}

/// The same disk integral by nested quadrature in polar coordinates.
pub fn i1_polar(ell1: f64, ell2: f64, gamma: f64) -> Result<f64> {
    let a = ell1 * ell2;
    let inner = |r: f64| {
        periodic_trapezoid(&|t: f64| {
            let (s, c) = t.sin_cos();
            r / (a + 4.0 * PI * PI * a * r * r * (s * s / (ell1 * ell1) + c * c / (ell2 * ell2)))
        })
    };
    adaptive_simpson(&inner, 0.0, gamma, APPENDIX_QUAD_TOL)
}

/// One-line reduction without the radial Jacobian,
/// `∫₀^γ dr / ((ℓ₁² + 4π²r²)(ℓ₂² + 4π²r²))^{1/2}`.
pub fn i1_without_jacobian(ell1: f64, ell2: f64, gamma: f64) -> Result<f64> {
    let f = |r: f64| 1.0 / ((ell1 * ell1 + 4.0 * PI * PI * r * r) * (ell2 * ell2 + 4.0 * PI * PI * r * r)).sqrt();
    adaptive_simpson(&f, 0.0, gamma, APPENDIX_QUAD_TOL)
}

/// `(4π)⁻¹ log(1 + 4π²γ²/(ℓ₁ℓ₂))`.
pub fn i1_bound(ell1: f64, ell2: f64, gamma: f64) -> f64 {
    (4.0 * PI * PI * gamma * gamma / (ell1 * ell2)).ln_1p() / (4.0 * PI)
}

/// `(ℓ₁² + ℓ₂²)/(32γ²π³)`.
pub fn i2_formula(ell1: f64, ell2: f64, gamma: f64) -> f64 {
    (ell1 * ell1 + ell2 * ell2) / (32.0 * gamma * gamma * PI.powi(3))
}

/// `∫_{|x|>γ} dx / (16π⁴ℓ₁ℓ₂|x/ℓ|⁴)` by nested quadrature, with `r = γ/s`
/// mapping the exterior onto `s ∈ (0, 1]`.
pub fn i2_quadrature(ell1: f64, ell2: f64, gamma: f64) -> Result<f64> {
    let c = 16.0 * PI.powi(4) * ell1 * ell2;
    let integrand = |s: f64| {
        // r⁻³ dr with r = γ/s becomes s/γ² ds.
        let radial = s / (gamma * gamma);
        radial
            * periodic_trapezoid(&|t: f64| {
                let (sn, co) = t.sin_cos();
                let q = sn * sn / (ell1 * ell1) + co * co / (ell2 * ell2);
                1.0 / (c * q * q)
            })
    };
    adaptive_simpson(&integrand, 0.0, 1.0, APPENDIX_QUAD_TOL)
}

/// Appendix quantities at one `(ℓ₁, ℓ₂, γ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AppendixRow {
    pub ell1: f64,
    pub ell2: f64,
    pub gamma: f64,
    pub i1: f64,
    pub i1_polar: f64,
    pub i1_bound: f64,
    pub i1_without_jacobian: f64,
    pub i2: f64,
    pub i2_quadrature: f64,
}

impl AppendixRow {
    pub fn evaluate(ell1: f64, ell2: f64, gamma: f64) -> Result<Self> {
        Ok(Self {
            ell1,
            ell2,
            gamma,
            i1: i1_radial(ell1, ell2, gamma)?,
            i1_polar: i1_polar(ell1, ell2, gamma)?,
            i1_bound: i1_bound(ell1, ell2, gamma),
            i1_without_jacobian: i1_without_jacobian(ell1, ell2, gamma)?,
            i2: i2_formula(ell1, ell2, gamma),
            i2_quadrature: i2_quadrature(ell1, ell2, gamma)?,
        })
    }

    /// `I₁ ≤ bound` up to the quadrature slack.
    pub fn i1_within_bound(&self) -> bool {
        self.i1 <= self.i1_bound + APPENDIX_QUAD_TOL
    }

    /// Radial reduction agrees with the polar double integral.
    pub fn i1_consistent(&self) -> bool {
        (self.i1 - self.i1_polar).abs() <= 10.0 * APPENDIX_QUAD_TOL * (1.0 + self.i1)
    }

    pub fn i2_consistent(&self) -> bool {
        (self.i2 - self.i2_quadrature).abs() <= 10.0 * APPENDIX_QUAD_TOL * (1.0 + self.i2)
    }

    pub fn passed(&self) -> bool {
        self.i1_within_bound() && self.i1_consistent() && self.i2_consistent()
    }
}

/// Evaluates every `(γ, ℓ)` combination of the grid's lengths and `gammas`.
pub fn check_appendix_integrals(grid: &GridSpec, gammas: &[f64]) -> Result<Vec<AppendixRow>> {
    if gammas.iter().any(|g| !(*g > 0.0)) {
        return Err(Error::InvalidArgument("γ values must be positive".into()));
    }
    gammas
        .iter()
        .map(|&g| AppendixRow::evaluate(grid.ell1, grid.ell2, g))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_domain_attains_the_bound() {
        // For ℓ₁ = ℓ₂ the radial integrand equals 2πr/(ℓ² + 4π²r²).
        for g in [1e-3, 0.5, 3.0, 100.0] {
            let r = AppendixRow::evaluate(2.0 * PI, 2.0 * PI, g).unwrap();
            assert!((r.i1 - r.i1_bound).abs() < 1e-9 * (1.0 + r.i1_bound), "{r:?}");
            assert!(r.passed());
        }
    }

    #[test]
    fn printed_reduction_has_arctan_form_and_exceeds_bound_for_small_gamma() {
        let l = 2.0 * PI;
        for g in [0.01, 0.1, 1.0] {
            let v = i1_without_jacobian(l, l, g).unwrap();
            let arctan = (2.0 * PI * g / l).atan() / (2.0 * PI * l);
            assert!((v - arctan).abs() < 1e-12);
        }
        assert!(i1_without_jacobian(l, l, 0.01).unwrap() > i1_bound(l, l, 0.01));
    }

    #[test]
    fn vanishing_radius() {
        let r = AppendixRow::evaluate(1.0, 3.0, 1e-8).unwrap();
        assert!(r.i1 < 1e-15 && r.i1_bound < 1e-15);
    }
}
