use std::f64::consts::PI;

use crate::spectral::GridSpec;

/// `‖ℓ‖/√(32π³)`.
pub fn tail_constant(grid: &GridSpec) -> f64 {
    grid.ell_norm() / (32.0 * PI.powi(3)).sqrt()
}

/// One-parameter `L∞` bound
/// `log^{1/2}(1 + 4π²γ²/(ℓ₁ℓ₂))‖u‖_{H¹}/√(2π) + ‖ℓ‖‖Δu‖/(γ√(32π³))`.
pub fn agmon_n_rhs(grid: &GridSpec, h1: f64, lap: f64, gamma: f64) -> f64 {
    let x = 4.0 * PI * PI * gamma * gamma / grid.area();
    let low = if h1 == 0.0 { 0.0 } else { x.ln_1p().sqrt() * h1 / (2.0 * PI).sqrt() };
    let high = if lap == 0.0 { 0.0 } else { tail_constant(grid) * lap / gamma };
    low + high
}

/// [`agmon_n_rhs`] with `log(1 + x)` replaced by its upper bound `x`.
pub fn agmon_n_rhs_linearized(grid: &GridSpec, h1: f64, lap: f64, gamma: f64) -> f64 {
    let x = 4.0 * PI * PI * gamma * gamma / grid.area();
    (x / (2.0 * PI)).sqrt() * h1 + tail_constant(grid) * lap / gamma
}

/// `γ = ‖u‖_{H¹}^{−1/2}‖Δu‖^{1/2}`.
pub fn agmon_gamma(h1: f64, lap: f64) -> f64 {
    (lap / h1).sqrt()
}

/// `γ = ‖Δu‖/‖u‖_{H¹}`.
pub fn brezis_gamma(h1: f64, lap: f64) -> f64 {
    lap / h1
}

/// Agmon-type bound `(√(2π/(ℓ₁ℓ₂)) + ‖ℓ‖/√(32π³))‖u‖_{H¹}^{1/2}‖Δu‖^{1/2}`.
pub fn agmon_rhs(grid: &GridSpec, h1: f64, lap: f64) -> f64 {
    ((2.0 * PI / grid.area()).sqrt() + tail_constant(grid)) * (h1 * lap).sqrt()
}

/// Brezis-type bound
/// `(‖ℓ‖/√(32π³) + log^{1/2}(1 + 4π²‖Δu‖²/(ℓ₁ℓ₂‖u‖²_{H¹}))/√(2π))‖u‖_{H¹}`.
pub fn brezis_rhs(grid: &GridSpec, h1: f64, lap: f64) -> f64 {
    let r = lap / h1;
    let x = 4.0 * PI * PI * r * r / grid.area();
    (tail_constant(grid) + x.ln_1p().sqrt() / (2.0 * PI).sqrt()) * h1
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn taylor_green_reference_numbers() {
        let g = GridSpec::square(2.0 * PI, 32).unwrap();
        // ‖u‖²_{H¹} = 2π²(1 + 2) and ‖Δu‖² = 4 · 2π² for the unit vortex.
        let h1 = (6.0 * PI * PI).sqrt();
        let lap = (8.0 * PI * PI).sqrt();
        assert!((h1 - 7.6953).abs() < 1e-4 && (lap - 8.8858).abs() < 1e-4);
        let rhs = agmon_n_rhs(&g, h1, lap, 1.0);
        let expect = 2f64.ln().sqrt() / (2.0 * PI).sqrt() * h1 + (8.0 * PI * PI).sqrt() * lap / (32.0 * PI.powi(3)).sqrt();
        assert!((rhs - expect).abs() < 1e-13);
        assert!((rhs - 5.06).abs() < 0.01);
    }

    #[test]
    fn zero_field_bounds_vanish() {
        let g = GridSpec::square(1.0, 8).unwrap();
        assert_eq!(agmon_n_rhs(&g, 0.0, 0.0, 0.3), 0.0);
    }

    #[test]
    fn brezis_is_exact_substitution() {
        let g = GridSpec::new(2.0, 5.0, 8, 8).unwrap();
        let (h1, lap) = (1.7, 23.0);
        let a = brezis_rhs(&g, h1, lap);
        let b = agmon_n_rhs(&g, h1, lap, brezis_gamma(h1, lap));
        assert!((a - b).abs() <= 1e-14 * a);
        let c = agmon_rhs(&g, h1, lap);
        let d = agmon_n_rhs_linearized(&g, h1, lap, agmon_gamma(h1, lap));
        assert!((c - d).abs() <= 1e-14 * c);
        assert!(c >= agmon_n_rhs(&g, h1, lap, agmon_gamma(h1, lap)));
    }
}
