use std::f64::consts::PI;

use crate::{Error, Result};

/// Periodic domain `[0, ℓ₁) × [0, ℓ₂)` discretised with `n₁ × n₂` collocation
/// nodes. Owns the wavenumber lattice and the dealiasing band.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub ell1: f64,
    pub ell2: f64,
    pub n1: usize,
    pub n2: usize,
    /// Fraction of the resolvable modes kept after every product.
    pub dealias_fraction: f64,
}

impl GridSpec {
    pub const TWO_THIRDS: f64 = 2.0 / 3.0;

    pub fn new(ell1: f64, ell2: f64, n1: usize, n2: usize) -> Result<Self> {
        Self::with_dealias(ell1, ell2, n1, n2, Self::TWO_THIRDS)
    }

    pub fn square(ell: f64, n: usize) -> Result<Self> {
        Self::new(ell, ell, n, n)
    }

    pub fn with_dealias(
        ell1: f64,
        ell2: f64,
        n1: usize,
        n2: usize,
        dealias_fraction: f64,
    ) -> Result<Self> {
        if !(ell1 > 0.0 && ell2 > 0.0 && ell1.is_finite() && ell2.is_finite()) {
            return Err(Error::InvalidGrid(format!(
                "period lengths must be positive, got ({ell1}, {ell2})"
            )));
        }
        for n in [n1, n2] {
            if n < 4 || n % 2 != 0 {
                return Err(Error::InvalidGrid(format!(
                    "resolution must be even and at least 4, got {n}"
                )));
            }
        }
        if !(dealias_fraction > 0.0 && dealias_fraction <= 1.0) {
            return Err(Error::InvalidGrid(format!(
                "dealias fraction must lie in (0, 1], got {dealias_fraction}"
            )));
        }
        Ok(Self {
            ell1,
            ell2,
            n1,
            n2,
            dealias_fraction,
        })
    }

    /// Smallest eigenvalue of the Stokes operator, `4π²/max(ℓ₁, ℓ₂)²`.
    pub fn lambda1(&self) -> f64 {
        let l = self.ell1.max(self.ell2);
        4.0 * PI * PI / (l * l)
    }

    /// Euclidean norm of the period vector `‖ℓ‖`.
    pub fn ell_norm(&self) -> f64 {
        self.ell1.hypot(self.ell2)
    }

    pub fn area(&self) -> f64 {
        self.ell1 * self.ell2
    }

    pub fn len(&self) -> usize {
        self.n1 * self.n2
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dx(&self) -> f64 {
        self.ell1 / self.n1 as f64
    }

    pub fn dy(&self) -> f64 {
        self.ell2 / self.n2 as f64
    }

    /// Signed wavenumber index of FFT-order position `i` for a transform of length `n`.
    #[inline]
    pub fn signed_index(i: usize, n: usize) -> i64 {
        if i < n / 2 {
            i as i64
        } else {
            i as i64 - n as i64
        }
    }

    /// FFT-order position of the signed index `k` (taken modulo `n`).
    #[inline]
    pub fn position(k: i64, n: usize) -> usize {
        k.rem_euclid(n as i64) as usize
    }

    /// Storage offset of the signed mode `(k₁, k₂)`.
    #[inline]
    pub fn offset(&self, k1: i64, k2: i64) -> usize {
        Self::position(k1, self.n1) * self.n2 + Self::position(k2, self.n2)
    }

    /// Signed mode indices stored at offset `idx`.
    #[inline]
    pub fn mode(&self, idx: usize) -> (i64, i64) {
        (
            Self::signed_index(idx / self.n2, self.n1),
            Self::signed_index(idx % self.n2, self.n2),
        )
    }

    /// Physical wavevector `2π(k₁/ℓ₁, k₂/ℓ₂)` for storage offset `idx`.
    ///
    /// Nyquist rows/columns get a zero component so that odd derivatives of
    /// real fields stay real.
    #[inline]
    pub fn wavevector(&self, idx: usize) -> (f64, f64) {
        let (i, j) = (idx / self.n2, idx % self.n2);
        let k1 = if i == self.n1 / 2 {
            0.0
        } else {
            Self::signed_index(i, self.n1) as f64
        };
        let k2 = if j == self.n2 / 2 {
            0.0
        } else {
            Self::signed_index(j, self.n2) as f64
        };
        (2.0 * PI * k1 / self.ell1, 2.0 * PI * k2 / self.ell2)
    }

    /// `|k|²` including Nyquist modes (used by even-order operators).
    #[inline]
    pub fn wavenumber_sq(&self, idx: usize) -> f64 {
        let (k1, k2) = self.mode(idx);
        let a = 2.0 * PI * k1 as f64 / self.ell1;
        let b = 2.0 * PI * k2 as f64 / self.ell2;
        a * a + b * b
    }

    /// Largest retained index per direction after dealiasing: the largest
    /// integer strictly below `fraction · n/2`. With the two-thirds rule this
    /// guarantees `3K < n`, so quadratic products do not alias into the band.
    pub fn band_limits(&self) -> (i64, i64) {
        let cap = |n: usize| {
            let x = self.dealias_fraction * n as f64 / 2.0;
            let k = (x - 1e-9).ceil() as i64 - 1;
            k.min(n as i64 / 2 - 1)
        };
        (cap(self.n1), cap(self.n2))
    }

    #[inline]
    pub fn in_band(&self, idx: usize) -> bool {
        let (k1, k2) = self.mode(idx);
        let (b1, b2) = self.band_limits();
        k1.abs() <= b1 && k2.abs() <= b2
    }

    /// Coordinates of collocation node `(i, j)`.
    pub fn node(&self, i: usize, j: usize) -> (f64, f64) {
        (i as f64 * self.dx(), j as f64 * self.dy())
    }

    /// Same domain at a different resolution.
    pub fn resampled(&self, n1: usize, n2: usize) -> Result<Self> {
        Self::with_dealias(self.ell1, self.ell2, n1, n2, self.dealias_fraction)
    }

    pub(crate) fn same_domain(&self, other: &GridSpec) -> bool {
        self == other
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lambda1_matches_closed_form() {
        let g = GridSpec::square(2.0 * PI, 16).unwrap();
        assert!((g.lambda1() - 1.0).abs() < 1e-15);
        let g = GridSpec::square(1.0, 16).unwrap();
        assert!((g.lambda1() - 4.0 * PI * PI).abs() < 1e-12);
        let g = GridSpec::new(1.0, 2.0, 8, 8).unwrap();
        assert!((g.lambda1() - PI * PI).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_resolution_and_lengths() {
        assert!(GridSpec::new(1.0, 1.0, 3, 8).is_err());
        assert!(GridSpec::new(1.0, 1.0, 2, 8).is_err());
        assert!(GridSpec::new(0.0, 1.0, 8, 8).is_err());
        assert!(GridSpec::new(1.0, -1.0, 8, 8).is_err());
        assert!(GridSpec::with_dealias(1.0, 1.0, 8, 8, 0.0).is_err());
        assert!(GridSpec::with_dealias(1.0, 1.0, 8, 8, 1.5).is_err());
    }

    #[test]
    fn offsets_round_trip() {
        let g = GridSpec::new(1.0, 3.0, 8, 12).unwrap();
        for idx in 0..g.len() {
            let (k1, k2) = g.mode(idx);
            assert_eq!(g.offset(k1, k2), idx);
        }
    }

    #[test]
    fn two_thirds_band() {
        let g = GridSpec::square(1.0, 128).unwrap();
        assert_eq!(g.band_limits(), (42, 42));
        let g = GridSpec::new(1.0, 1.0, 24, 96).unwrap();
        assert_eq!(g.band_limits(), (7, 31));
        let g = GridSpec::with_dealias(1.0, 1.0, 8, 8, 1.0).unwrap();
        assert_eq!(g.band_limits(), (3, 3));
    }
}
