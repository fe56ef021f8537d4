use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{GridSpec, ScalarField, VelocityField};
use crate::{Error, Result};

/// Parameters of the seeded random field generator.
///
/// Mode `(k₁, k₂)` with `0 < max(|k₁|, |k₂|) ≤ band` receives a complex Gaussian
/// coefficient scaled by `(k₁² + k₂²)^{−decay/2}`; everything else is zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RandomFieldSpec {
    pub seed: u64,
    pub band: usize,
    pub spectrum_decay: f64,
    pub count: usize,
    pub divergence_free: bool,
}

impl RandomFieldSpec {
    pub fn new(seed: u64, band: usize, spectrum_decay: f64, count: usize) -> Self {
        Self {
            seed,
            band,
            spectrum_decay,
            count,
            divergence_free: true,
        }
    }

    pub fn with_divergence_free(mut self, flag: bool) -> Self {
        self.divergence_free = flag;
        self
    }
}

/// Field number `field_id` of the family described by `spec`. Each field has
/// its own random stream, so fields can be generated independently and in
/// any order.
pub fn random_field(grid: GridSpec, spec: &RandomFieldSpec, field_id: u64) -> Result<VelocityField> {
    let band = spec.band as i64;
    if spec.band == 0 || 2 * band >= grid.n1 as i64 || 2 * band >= grid.n2 as i64 {
        return Err(Error::InvalidArgument(format!(
            "band {} must be positive and below the Nyquist index of {}×{}",
            spec.band, grid.n1, grid.n2
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    rng.set_stream(field_id);
    let mut a = vec![Complex64::default(); grid.len()];
    let mut b = vec![Complex64::default(); grid.len()];
    let mut gauss = || -> Complex64 {
        let re: f64 = StandardNormal.sample(&mut rng);
        let im: f64 = StandardNormal.sample(&mut rng);
        Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
    };
    for k1 in 0..=band {
        for k2 in -band..=band {
            if k1 == 0 && k2 <= 0 {
                continue;
            }
            let amp = ((k1 * k1 + k2 * k2) as f64).powf(-0.5 * spec.spectrum_decay);
            let (c1, c2) = if spec.divergence_free {
                // Velocity of a streamfunction mode: direction ⟂ k.
                let (q1, q2) = (
                    2.0 * std::f64::consts::PI * k1 as f64 / grid.ell1,
                    2.0 * std::f64::consts::PI * k2 as f64 / grid.ell2,
                );
                let q = q1.hypot(q2);
                let s = gauss() * amp;
                (s * (q2 / q), s * (-q1 / q))
            } else {
                (gauss() * amp, gauss() * amp)
            };
            let p = grid.offset(k1, k2);
            let m = grid.offset(-k1, -k2);
            a[p] = c1;
            b[p] = c2;
            a[m] = c1.conj();
            b[m] = c2.conj();
        }
    }
    Ok(VelocityField {
        u1: ScalarField::from_coeffs_unchecked(grid, a),
        u2: ScalarField::from_coeffs_unchecked(grid, b),
    })
}

/// All `spec.count` fields of the family, in order.
pub fn random_fields(grid: GridSpec, spec: &RandomFieldSpec) -> Result<Vec<VelocityField>> {
    (0..spec.count as u64)
        .map(|i| random_field(grid, spec, i))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fields_are_real_zero_mean_and_solenoidal() {
        let g = GridSpec::new(1.0, 2.0, 16, 16).unwrap();
        let spec = RandomFieldSpec::new(7, 5, 1.5, 4);
        for v in random_fields(g, &spec).unwrap() {
            assert!(v.is_zero_mean());
            assert!(v.u1.hermitian_defect() == 0.0 && v.u2.hermitian_defect() == 0.0);
            assert!(v.relative_divergence() < 1e-15);
        }
        let v = random_field(g, &spec.with_divergence_free(false), 0).unwrap();
        assert!(v.relative_divergence() > 1e-3);
    }

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let g = GridSpec::square(1.0, 16).unwrap();
        let spec = RandomFieldSpec::new(3, 4, 1.0, 3);
        let a = random_field(g, &spec, 2).unwrap();
        let b = random_fields(g, &spec).unwrap();
        assert_eq!(a, b[2]);
        assert_ne!(b[0], b[1]);
    }

    #[test]
    fn rejects_band_at_nyquist() {
        let g = GridSpec::square(1.0, 8).unwrap();
        assert!(random_field(g, &RandomFieldSpec::new(0, 4, 1.0, 1), 0).is_err());
        assert!(random_field(g, &RandomFieldSpec::new(0, 3, 1.0, 1), 0).is_ok());
    }
}
