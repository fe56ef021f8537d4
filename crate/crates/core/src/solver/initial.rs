use std::f64::consts::PI;

use crate::spectral::{poisson_solve, GridSpec, ScalarField, VelocityField};

/// `peaks(a, b) = 3(1−a)²e^{−a²−(b+1)²} − 10(a/5 − a³ − b⁵)e^{−a²−b²} − e^{−(a+1)²−b²}/3`.
pub fn peaks(a: f64, b: f64) -> f64 {
    3.0 * (1.0 - a).powi(2) * (-a * a - (b + 1.0).powi(2)).exp()
        - 10.0 * (a / 5.0 - a.powi(3) - b.powi(5)) * (-a * a - b * b).exp()
        - (-(a + 1.0).powi(2) - b * b).exp() / 3.0
}

/// Mean-free, band-limited interpolant of `peaks` with the domain mapped
/// affinely onto `[−3, 3]²`.
pub fn peaks_vorticity(grid: GridSpec) -> ScalarField {
    let mut w = ScalarField::from_fn(grid, |x, y| {
        peaks(-3.0 + 6.0 * x / grid.ell1, -3.0 + 6.0 * y / grid.ell2)
    })
    .truncate_band();
    w.coeffs_mut()[0] = Default::default();
    w
}

/// Velocity whose vorticity is [`peaks_vorticity`]: `Δψ = −ω`, `u = (ψ_y, −ψ_x)`.
pub fn peaks_initial_condition(grid: GridSpec) -> VelocityField {
    let psi = poisson_solve(&peaks_vorticity(grid)).expect("vorticity has zero mean");
    VelocityField::from_streamfunction(&psi)
}

/// Taylor-Green vortex with streamfunction `A cos(qx) cos(py)`, `q = 2π/ℓ₁`,
/// `p = 2π/ℓ₂`; on `ℓ = 2π` this is `A(−cos x sin y, sin x cos y)`.
pub fn taylor_green(grid: GridSpec, amplitude: f64) -> VelocityField {
    let (q, p) = (2.0 * PI / grid.ell1, 2.0 * PI / grid.ell2);
    VelocityField::from_fn(
        grid,
        |x, y| -amplitude * p * (q * x).cos() * (p * y).sin(),
        |x, y| amplitude * q * (q * x).sin() * (p * y).cos(),
    )
}

/// Decay rate `ν(q² + p²)` of the unforced Taylor-Green vortex.
pub fn taylor_green_rate(grid: &GridSpec, nu: f64) -> f64 {
    let (q, p) = (2.0 * PI / grid.ell1, 2.0 * PI / grid.ell2);
    nu * (q * q + p * p)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn peaks_reference_values() {
        // Closed-form evaluations of the formula.
        assert!((peaks(0.0, 0.0) - (3.0 * (-1.0f64).exp() - (-1.0f64).exp() / 3.0)).abs() < 1e-15);
        let v = peaks(1.0, -1.0);
        let expect = -10.0 * (0.2 - 1.0 + 1.0) * (-2.0f64).exp() - (-5.0f64).exp() / 3.0;
        assert!((v - expect).abs() < 1e-15);
    }

    #[test]
    fn peaks_velocity_is_solenoidal_with_matching_vorticity() {
        let g = GridSpec::square(2.0 * PI, 64).unwrap();
        let u = peaks_initial_condition(g);
        assert!(u.is_zero_mean());
        assert!(u.relative_divergence() < 1e-14);
        let w = peaks_vorticity(g);
        assert!(u.curl().sub(&w).unwrap().l2_norm() < 1e-12 * w.l2_norm());
    }

    #[test]
    fn taylor_green_on_rectangle_is_solenoidal() {
        let g = GridSpec::new(2.0, 3.0, 16, 16).unwrap();
        let v = taylor_green(g, 0.5);
        assert!(v.relative_divergence() < 1e-14);
        let av = v.stokes_apply().unwrap();
        let rate = taylor_green_rate(&g, 1.0);
        assert!(av.sub(&v.scale(rate)).unwrap().l2_norm() < 1e-12 * av.l2_norm());
    }
}
