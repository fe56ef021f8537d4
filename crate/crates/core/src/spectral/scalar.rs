use num_complex::Complex64;

use super::{fft2_forward, fft2_inverse, GridSpec};
use crate::{Error, Result};

/// Relative Hermitian defect above which a coefficient array is rejected as
/// not representing a real field.
pub(crate) const HERMITIAN_TOL: f64 = 1e-10;

/// Real periodic scalar field held as Fourier coefficients in FFT order.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: GridSpec,
    coeffs: Vec<Complex64>,
}

impl ScalarField {
    pub fn zeros(grid: GridSpec) -> Self {
        Self {
            grid,
            coeffs: vec![Complex64::default(); grid.len()],
        }
    }

    /// Builds a field from coefficients, rejecting arrays that do not
    /// describe a real-valued function.
    pub fn from_coeffs(grid: GridSpec, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(Error::InvalidArgument(format!(
                "expected {} coefficients, got {}",
                grid.len(),
                coeffs.len()
            )));
        }
        let f = Self { grid, coeffs };
        let defect = f.hermitian_defect();
        if defect > HERMITIAN_TOL {
            return Err(Error::NotHermitian { defect });
        }
        Ok(f)
    }

    pub(crate) fn from_coeffs_unchecked(grid: GridSpec, coeffs: Vec<Complex64>) -> Self {
        debug_assert_eq!(coeffs.len(), grid.len());
        Self { grid, coeffs }
    }

    /// Coefficients of the trigonometric interpolant of nodal samples
    /// (`samples[i * n2 + j] = u(x_i, y_j)`).
    pub fn from_physical(grid: GridSpec, samples: &[f64]) -> Result<Self> {
        if samples.len() != grid.len() {
            return Err(Error::InvalidArgument(format!(
                "expected {} samples, got {}",
                grid.len(),
                samples.len()
            )));
        }
        let mut c: Vec<Complex64> = samples.iter().map(|&s| Complex64::new(s, 0.0)).collect();
        fft2_forward(&mut c, grid.n1, grid.n2);
        let inv = 1.0 / grid.len() as f64;
        for z in &mut c {
            *z *= inv;
        }
        let mut f = Self { grid, coeffs: c };
        f.symmetrize();
        Ok(f)
    }

    /// Interpolant of `f(x, y)` sampled at the collocation nodes.
    pub fn from_fn(grid: GridSpec, f: impl Fn(f64, f64) -> f64) -> Self {
        let mut s = Vec::with_capacity(grid.len());
        for i in 0..grid.n1 {
            for j in 0..grid.n2 {
                let (x, y) = grid.node(i, j);
                s.push(f(x, y));
            }
        }
        Self::from_physical(grid, &s).expect("sample count matches grid")
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub(crate) fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    /// Coefficient of the signed mode `(k₁, k₂)`.
    pub fn coeff(&self, k1: i64, k2: i64) -> Complex64 {
        self.coeffs[self.grid.offset(k1, k2)]
    }

    /// `max_k |û_k − conj(û_{−k})|` relative to `max_k |û_k|`.
    pub fn hermitian_defect(&self) -> f64 {
        let g = &self.grid;
        let mut scale = 0.0f64;
        let mut defect = 0.0f64;
        for idx in 0..g.len() {
            let (k1, k2) = g.mode(idx);
            let a = self.coeffs[idx];
            let b = self.coeffs[g.offset(-k1, -k2)];
            scale = scale.max(a.norm());
            defect = defect.max((a - b.conj()).norm());
        }
        if scale == 0.0 {
            0.0
        } else {
            defect / scale
        }
    }

    /// Replaces coefficients by the Hermitian part `(û_k + conj(û_{−k}))/2`.
    pub(crate) fn symmetrize(&mut self) {
        let g = self.grid;
        for idx in 0..g.len() {
            let (k1, k2) = g.mode(idx);
            let jdx = g.offset(-k1, -k2);
            if jdx < idx {
                continue;
            }
            let a = self.coeffs[idx];
            let b = self.coeffs[jdx];
            let s = 0.5 * (a + b.conj());
            self.coeffs[idx] = s;
            self.coeffs[jdx] = s.conj();
        }
    }

    /// Physical samples on the grid refined by `oversample` in each
    /// direction, row-major.
    ///
    /// Nyquist coefficients are split evenly between `±n/2` when refining so
    /// the result is the real trigonometric interpolant. Round-off
    /// asymmetry in the coefficients is discarded with the imaginary part.
    pub fn to_physical(&self, oversample: usize) -> Result<Vec<f64>> {
        if oversample == 0 {
            return Err(Error::InvalidArgument("oversample must be ≥ 1".into()));
        }
        let (m1, m2) = (self.grid.n1 * oversample, self.grid.n2 * oversample);
        let mut buf = self.spread(m1, m2);
        fft2_inverse(&mut buf, m1, m2);
        Ok(buf.into_iter().map(|z| z.re).collect())
    }

    /// Coefficients placed on an `m1 × m2` lattice (`m ≥ n`), Nyquist split.
    pub(crate) fn spread(&self, m1: usize, m2: usize) -> Vec<Complex64> {
        let g = &self.grid;
        let mut out = vec![Complex64::default(); m1 * m2];
        spread_into(&self.coeffs, g.n1, g.n2, &mut out, m1, m2);
        out
    }

    /// Value at an arbitrary point by direct summation of the Fourier series.
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        let g = &self.grid;
        let tau = 2.0 * std::f64::consts::PI;
        let mut s = 0.0;
        for (idx, c) in self.coeffs.iter().enumerate() {
            if *c == Complex64::default() {
                continue;
            }
            let (i, j) = (idx / g.n2, idx % g.n2);
            let w1 = if i == g.n1 / 2 { 0.5 } else { 1.0 };
            let w2 = if j == g.n2 / 2 { 0.5 } else { 1.0 };
            let (k1, k2) = g.mode(idx);
            let mut acc = 0.0;
            for s1 in nyquist_signs(i, g.n1) {
                for s2 in nyquist_signs(j, g.n2) {
                    let ph = tau * (s1 * k1 as f64 * x / g.ell1 + s2 * k2 as f64 * y / g.ell2);
                    acc += (c * Complex64::from_polar(1.0, ph)).re;
                }
            }
            s += w1 * w2 * acc;
        }
        s
    }

    /// Mean value `û_{(0,0)}`.
    pub fn mean(&self) -> f64 {
        self.coeffs[0].re
    }

    /// `‖u‖²_{L²} = ℓ₁ℓ₂ Σ |û_k|²`.
    pub fn l2_norm_sq(&self) -> f64 {
        self.grid.area() * self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>()
    }

    pub fn l2_norm(&self) -> f64 {
        self.l2_norm_sq().sqrt()
    }

    /// `(u, w)_{L²}`.
    pub fn inner(&self, other: &ScalarField) -> Result<f64> {
        self.check_grid(other)?;
        Ok(self.grid.area()
            * self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| (a * b.conj()).re)
                .sum::<f64>())
    }

    pub fn check_grid(&self, other: &ScalarField) -> Result<()> {
        if self.grid.same_domain(&other.grid) {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    fn map_modes(&self, f: impl Fn(usize, Complex64) -> Complex64) -> Self {
        Self {
            grid: self.grid,
            coeffs: self
                .coeffs
                .iter()
                .enumerate()
                .map(|(i, &c)| f(i, c))
                .collect(),
        }
    }

    pub fn dx(&self) -> Self {
        let g = self.grid;
        self.map_modes(|i, c| c * Complex64::new(0.0, g.wavevector(i).0))
    }

    pub fn dy(&self) -> Self {
        let g = self.grid;
        self.map_modes(|i, c| c * Complex64::new(0.0, g.wavevector(i).1))
    }

    pub fn laplacian(&self) -> Self {
        let g = self.grid;
        self.map_modes(|i, c| c * -g.wavenumber_sq(i))
    }

    /// Zeroes every mode outside the dealiasing band.
    pub fn truncate_band(&self) -> Self {
        let g = self.grid;
        self.map_modes(|i, c| if g.in_band(i) { c } else { Complex64::default() })
    }

    pub fn scale(&self, a: f64) -> Self {
        self.map_modes(|_, c| c * a)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_grid(other)?;
        Ok(self.map_modes(|i, c| c + other.coeffs[i]))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_grid(other)?;
        Ok(self.map_modes(|i, c| c - other.coeffs[i]))
    }

    /// Largest coefficient magnitude.
    pub fn max_coeff(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Spectral interpolation onto the same domain at another resolution.
    /// Modes that do not fit below the new Nyquist index are dropped.
    pub fn resample(&self, n1: usize, n2: usize) -> Result<Self> {
        let target = self.grid.resampled(n1, n2)?;
        let mut out = ScalarField::zeros(target);
        let g = &self.grid;
        for (idx, &c) in self.coeffs.iter().enumerate() {
            if c == Complex64::default() {
                continue;
            }
            let (i, j) = (idx / g.n2, idx % g.n2);
            let (k1, k2) = g.mode(idx);
            let w1 = if i == g.n1 / 2 && n1 > g.n1 { 0.5 } else { 1.0 };
            let w2 = if j == g.n2 / 2 && n2 > g.n2 { 0.5 } else { 1.0 };
            let s1: &[f64] = if w1 < 1.0 { &[1.0, -1.0] } else { &[1.0] };
            let s2: &[f64] = if w2 < 1.0 { &[1.0, -1.0] } else { &[1.0] };
            for &a in s1 {
                for &b in s2 {
                    let (q1, q2) = ((a * k1 as f64) as i64, (b * k2 as f64) as i64);
                    if 2 * q1.abs() >= n1 as i64 || 2 * q2.abs() >= n2 as i64 {
                        continue;
                    }
                    let o = target.offset(q1, q2);
                    out.coeffs[o] += c * (w1 * w2);
                }
            }
        }
        Ok(out)
    }
}

fn nyquist_signs(i: usize, n: usize) -> &'static [f64] {
    if i == n / 2 {
        &[1.0, -1.0]
    } else {
        &[1.0]
    }
}

/// Copies FFT-order coefficients of an `n1 × n2` field onto a zeroed
/// `m1 × m2` lattice (`m ≥ n`), splitting Nyquist modes when `m > n`.
pub(crate) fn spread_into(
    src: &[Complex64],
    n1: usize,
    n2: usize,
    out: &mut [Complex64],
    m1: usize,
    m2: usize,
) {
    debug_assert!(m1 >= n1 && m2 >= n2);
    if m1 == n1 && m2 == n2 {
        out.copy_from_slice(src);
        return;
    }
    for z in out.iter_mut() {
        *z = Complex64::default();
    }
    let targets = |i: usize, n: usize, m: usize| -> ([usize; 2], usize, f64) {
        let k = GridSpec::signed_index(i, n);
        if i == n / 2 && m > n {
            (
                [GridSpec::position(k, m), GridSpec::position(-k, m)],
                2,
                0.5,
            )
        } else {
            ([GridSpec::position(k, m), 0], 1, 1.0)
        }
    };
    for i in 0..n1 {
        let (r, nr, wr) = targets(i, n1, m1);
        for j in 0..n2 {
            let c = src[i * n2 + j];
            if c == Complex64::default() {
                continue;
            }
            let (s, ns, ws) = targets(j, n2, m2);
            let w = wr * ws;
            for &a in &r[..nr] {
                for &b in &s[..ns] {
                    out[a * m2 + b] += c * w;
                }
            }
        }
    }
}
