use std::f64::consts::PI;
use std::fmt::Write as _;

use num_complex::Complex64;

use crate::spectral::{fft2_forward, fft2_inverse, GridSpec, ScalarField};
use crate::{Error, Result};

/// Uniform `n_x × n_y` partition of the periodic domain into rectangles
/// `[a h_x, (a+1) h_x) × [b h_y, (b+1) h_y)`; also used as the node lattice
/// `(a h_x, b h_y)` of point operators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Partition {
    pub grid: GridSpec,
    pub nx: usize,
    pub ny: usize,
}

impl Partition {
    pub fn new(grid: GridSpec, nx: usize, ny: usize) -> Result<Self> {
        if nx == 0 || ny == 0 {
            return Err(Error::InvalidArgument(format!(
                "partition needs at least one cell per direction, got {nx}×{ny}"
            )));
        }
        Ok(Self { grid, nx, ny })
    }

    pub fn hx(&self) -> f64 {
        self.grid.ell1 / self.nx as f64
    }

    pub fn hy(&self) -> f64 {
        self.grid.ell2 / self.ny as f64
    }

    pub fn h(&self) -> f64 {
        self.hx().max(self.hy())
    }

    pub fn cells(&self) -> usize {
        self.nx * self.ny
    }

    pub fn cell_area(&self) -> f64 {
        self.hx() * self.hy()
    }

    /// `n_x > 2K₁` and `n_y > 2K₂` for the grid's band limits `K`.
    pub fn resolves_band(&self) -> bool {
        let (b1, b2) = self.grid.band_limits();
        self.nx as i64 > 2 * b1 && self.ny as i64 > 2 * b2
    }

    /// Same domain with both counts doubled.
    pub fn refined(&self) -> Self {
        Self {
            grid: self.grid,
            nx: 2 * self.nx,
            ny: 2 * self.ny,
        }
    }

    /// `Σ_k û_k s(k) e^{2πi(k₁a/n_x + k₂b/n_y)}` for every lattice index
    /// `(a, b)`, i.e. the Fourier series with per-mode weights `s`, sampled on
    /// the lattice. Nyquist modes of the field are split evenly between
    /// `±n/2` so that the result is that of the real interpolant.
    pub(crate) fn sample_weighted(
        &self,
        f: &ScalarField,
        weight: &dyn Fn(i64, i64) -> Complex64,
    ) -> Vec<f64> {
        let g = f.grid();
        let (nx, ny) = (self.nx, self.ny);
        let mut folded = vec![Complex64::default(); nx * ny];
        for (idx, &c) in f.coeffs().iter().enumerate() {
            if c == Complex64::default() {
                continue;
            }
            let (i, j) = (idx / g.n2, idx % g.n2);
            let (k1, k2) = g.mode(idx);
            let s1: &[i64] = if i == g.n1 / 2 { &[1, -1] } else { &[1] };
            let s2: &[i64] = if j == g.n2 / 2 { &[1, -1] } else { &[1] };
            let w = 1.0 / (s1.len() * s2.len()) as f64;
            for &a in s1 {
                for &b in s2 {
                    let (q1, q2) = (a * k1, b * k2);
                    let p = GridSpec::position(q1, nx) * ny + GridSpec::position(q2, ny);
                    folded[p] += c * weight(q1, q2) * w;
                }
            }
        }
        fft2_inverse(&mut folded, nx, ny);
        folded.into_iter().map(|z| z.re).collect()
    }

    /// Fourier coefficients on `grid` of `Σ_j values_j ψ(x − x_j)` where the
    /// per-mode transform of the generating function `ψ` (normalised by the
    /// cell area) is `symbol(k)`. Modes at the grid's Nyquist index are left
    /// at zero.
    pub(crate) fn synthesize(
        &self,
        values: &[f64],
        grid: &GridSpec,
        symbol: &dyn Fn(i64, i64) -> Complex64,
    ) -> Vec<Complex64> {
        let (nx, ny) = (self.nx, self.ny);
        let mut d: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        fft2_forward(&mut d, nx, ny);
        let inv = 1.0 / (nx * ny) as f64;
        let mut out = vec![Complex64::default(); grid.len()];
        for (idx, z) in out.iter_mut().enumerate() {
            let (k1, k2) = grid.mode(idx);
            if 2 * k1.unsigned_abs() as usize == grid.n1 || 2 * k2.unsigned_abs() as usize == grid.n2 {
                continue;
            }
            let p = GridSpec::position(k1, nx) * ny + GridSpec::position(k2, ny);
            *z = d[p] * symbol(k1, k2) * inv;
        }
        out
    }
}

/// `sinc(x) = sin(x)/x` with `sinc(0) = 1`.
pub(crate) fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// Mean of `e^{2πikx/ℓ}` over `[0, ℓ/n)`: `e^{iπk/n} sinc(πk/n)`.
pub(crate) fn cell_mean_factor(k: i64, n: usize) -> Complex64 {
    let t = PI * k as f64 / n as f64;
    Complex64::from_polar(sinc(t), t)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ObservationKind {
    CellMeans,
    NodeValues,
}

/// Finite output of an observation operator: one velocity pair per cell or
/// node, stored row-major (`index = a·n_y + b`).
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationVector {
    pub kind: ObservationKind,
    pub nx: usize,
    pub ny: usize,
    pub c1: Vec<f64>,
    pub c2: Vec<f64>,
}

impl ObservationVector {
    /// Number of scalar values, `2 n_x n_y`.
    pub fn len(&self) -> usize {
        self.c1.len() + self.c2.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn to_csv(&self) -> String {
        let header = match self.kind {
            ObservationKind::CellMeans => "cell_ix,cell_iy,c1,c2",
            ObservationKind::NodeValues => "node_ix,node_iy,u1,u2",
        };
        let mut s = String::with_capacity(64 * (self.c1.len() + 1));
        s.push_str(header);
        s.push('\n');
        for a in 0..self.nx {
            for b in 0..self.ny {
                let k = a * self.ny + b;
                let _ = writeln!(s, "{a},{b},{:.17e},{:.17e}", self.c1[k], self.c2[k]);
            }
        }
        s
    }
}
