use std::path::PathBuf;

use num_complex::Complex64;

use crate::spectral::{random_field, snapshot, GridSpec, RandomFieldSpec, ScalarField, VelocityField};
use crate::{Error, Result};

/// Source of the steady part of the body force.
#[derive(Debug, Clone, PartialEq)]
pub enum ForcingKind {
    /// `(a sin(2π m y/ℓ₂), 0)`.
    Kolmogorov,
    Zero,
    /// Field read from an `NSEF1` snapshot, rescaled to the target norm.
    Snapshot(PathBuf),
}

/// Decaying additive perturbation `p(x) e^{−rate·t}` with `max |p| < amplitude`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerturbationSpec {
    pub amplitude: f64,
    pub rate: f64,
    pub seed: u64,
    /// Highest wavenumber index of the random shape.
    pub band: usize,
}

impl PerturbationSpec {
    pub fn new(amplitude: f64, rate: f64, seed: u64) -> Self {
        Self {
            amplitude,
            rate,
            seed,
            band: 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForcingSpec {
    pub kind: ForcingKind,
    pub mode: usize,
    pub target_l2: f64,
    pub perturbation: Option<PerturbationSpec>,
}

impl ForcingSpec {
    pub fn kolmogorov(mode: usize, target_l2: f64) -> Self {
        Self {
            kind: ForcingKind::Kolmogorov,
            mode,
            target_l2,
            perturbation: None,
        }
    }

    pub fn zero() -> Self {
        Self {
            kind: ForcingKind::Zero,
            mode: 0,
            target_l2: 0.0,
            perturbation: None,
        }
    }

    pub fn with_perturbation(mut self, p: PerturbationSpec) -> Self {
        self.perturbation = Some(p);
        self
    }

    /// Builds the projected, band-limited forcing on `grid`.
    pub fn realize(&self, grid: GridSpec) -> Result<Forcing> {
        let base = match &self.kind {
            ForcingKind::Kolmogorov => kolmogorov_forcing(grid, self.mode, self.target_l2)?,
            ForcingKind::Zero => VelocityField::zeros(grid),
            ForcingKind::Snapshot(path) => {
                let f = snapshot::load(path)?;
                if f.grid().n1 != grid.n1
                    || f.grid().n2 != grid.n2
                    || f.grid().ell1 != grid.ell1
                    || f.grid().ell2 != grid.ell2
                {
                    return Err(Error::GridMismatch);
                }
                let f = VelocityField::new(
                    ScalarField::from_coeffs(grid, f.u1.into_coeffs())?,
                    ScalarField::from_coeffs(grid, f.u2.into_coeffs())?,
                )?
                .leray_project()
                .truncate_band();
                let n = f.l2_norm();
                if n > 0.0 {
                    f.scale(self.target_l2 / n)
                } else {
                    f
                }
            }
        };
        let perturbation = match self.perturbation {
            Some(p) if p.amplitude > 0.0 => Some((
                bounded_perturbation(grid, p.amplitude, p.seed, p.band)?,
                p.rate,
            )),
            _ => None,
        };
        Ok(Forcing { base, perturbation })
    }
}

/// Realised forcing `f(t) = base + p e^{−rate·t}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Forcing {
    base: VelocityField,
    perturbation: Option<(VelocityField, f64)>,
}

impl Forcing {
    pub fn steady(base: VelocityField) -> Self {
        Self {
            base: base.leray_project().truncate_band(),
            perturbation: None,
        }
    }

    pub fn base(&self) -> &VelocityField {
        &self.base
    }

    pub fn perturbation(&self) -> Option<(&VelocityField, f64)> {
        self.perturbation.as_ref().map(|(p, r)| (p, *r))
    }

    pub fn is_steady(&self) -> bool {
        self.perturbation.is_none()
    }

    pub fn at(&self, t: f64) -> VelocityField {
        match &self.perturbation {
            None => self.base.clone(),
            Some((p, rate)) => self
                .base
                .axpy((-rate * t).exp(), p)
                .expect("perturbation shares the forcing grid"),
        }
    }

    /// `‖f‖_{L²}` of the steady part.
    pub fn l2_norm(&self) -> f64 {
        self.base.l2_norm()
    }
}

/// `f = (a sin(2π·mode·y/ℓ₂), 0)` with `a` chosen so that `‖f‖_{L²} = target_l2`.
pub fn kolmogorov_forcing(grid: GridSpec, mode: usize, target_l2: f64) -> Result<VelocityField> {
    let (_, b2) = grid.band_limits();
    if mode == 0 || mode as i64 > b2 {
        return Err(Error::InvalidArgument(format!(
            "forcing mode {mode} outside the dealiased band 1..={b2}"
        )));
    }
    if !(target_l2 >= 0.0 && target_l2.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "forcing norm must be non-negative, got {target_l2}"
        )));
    }
    let a = target_l2 * (2.0 / grid.area()).sqrt();
    let mut c = vec![Complex64::default(); grid.len()];
    let m = mode as i64;
    c[grid.offset(0, m)] = Complex64::new(0.0, -0.5 * a);
    c[grid.offset(0, -m)] = Complex64::new(0.0, 0.5 * a);
    Ok(VelocityField {
        u1: ScalarField::from_coeffs(grid, c)?,
        u2: ScalarField::zeros(grid),
    })
}

/// Seeded random divergence-free zero-mean field whose sampled maximum
/// magnitude is `0.99 · amplitude`.
pub fn bounded_perturbation(grid: GridSpec, amplitude: f64, seed: u64, band: usize) -> Result<VelocityField> {
    let shape = random_field(grid, &RandomFieldSpec::new(seed, band, 1.0, 1), 0)?;
    let peak = shape.linf_sampled(8)?;
    Ok(shape.scale(0.99 * amplitude / peak))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn kolmogorov_norm_and_shape() {
        let g = GridSpec::square(2.0 * PI, 32).unwrap();
        let f = kolmogorov_forcing(g, 6, 0.1).unwrap();
        assert!((f.l2_norm() - 0.1).abs() < 1e-10 * 0.1);
        assert!(f.is_zero_mean() && f.relative_divergence() < 1e-13);
        let a = 0.1 * (2.0 / g.area()).sqrt();
        let (x, y) = (0.3, 1.1);
        assert!((f.eval(x, y).0 - a * (6.0 * y).sin()).abs() < 1e-14);
        assert_eq!(kolmogorov_forcing(g, 6, 0.0).unwrap().l2_norm(), 0.0);
        assert!(kolmogorov_forcing(g, 11, 0.1).is_err());
        assert!(kolmogorov_forcing(g, 0, 0.1).is_err());
    }

    #[test]
    fn perturbation_respects_amplitude_and_decays() {
        let g = GridSpec::square(2.0 * PI, 32).unwrap();
        let spec = ForcingSpec::kolmogorov(2, 0.5).with_perturbation(PerturbationSpec::new(1e-3, 2.0, 9));
        let f = spec.realize(g).unwrap();
        for t in [0.0, 0.7, 3.0] {
            let d = f.at(t).sub(f.base()).unwrap();
            let bound = 1e-3 * (-2.0f64 * t).exp();
            assert!(d.linf_sampled(4).unwrap() < bound);
            assert!(d.linf_sampled(4).unwrap() > 0.9 * bound);
            assert!(d.is_solenoidal());
        }
        assert!(ForcingSpec::zero().realize(g).unwrap().is_steady());
    }
}
