use std::f64::consts::PI;

use num_complex::Complex64;

use super::lattice::{sinc, ObservationKind, ObservationVector, Partition};
use super::ObservationOperator;
use crate::gain::OperatorClass;
use crate::spectral::{GridSpec, ScalarField, VelocityField};
use crate::{Error, Result};

/// Point samples on the uniform node lattice `(a h_x, b h_y)`, reconstructed
/// by periodic bilinear interpolation (tensor hat functions).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointOperator {
    pub partition: Partition,
    /// Certificate constant of `‖u − Cu‖² ≤ h² Ĉ_Ω ‖Δu‖²`, set by
    /// calibration.
    pub c_omega_hat: f64,
}

fn hat_symbol(k1: i64, k2: i64, nx: usize, ny: usize) -> f64 {
    let s1 = sinc(PI * k1 as f64 / nx as f64);
    let s2 = sinc(PI * k2 as f64 / ny as f64);
    s1 * s1 * s2 * s2
}

impl PointOperator {
    pub fn new(partition: Partition, c_omega_hat: f64) -> Result<Self> {
        if !(c_omega_hat.is_finite() && c_omega_hat > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "point certificate constant must be positive, got {c_omega_hat}"
            )));
        }
        Ok(Self {
            partition,
            c_omega_hat,
        })
    }

    /// Operator with `Ĉ_Ω` set to the safety factor times the largest
    /// observed ratio `‖u − Cu‖² / (h²‖Δu‖²)` over `samples`.
    pub fn calibrated(partition: Partition, samples: &[VelocityField]) -> Result<Self> {
        let probe = Self {
            partition,
            c_omega_hat: 1.0,
        };
        let report = super::certify_class(&probe, samples)?;
        Self::new(partition, super::POINT_SAFETY_FACTOR * report.max_ratio)
    }

    fn check(&self, v: &VelocityField) -> Result<()> {
        if v.grid() != &self.partition.grid {
            return Err(Error::GridMismatch);
        }
        Ok(())
    }

    fn samples(&self, f: &ScalarField) -> Vec<f64> {
        self.partition.sample_weighted(f, &|_, _| Complex64::new(1.0, 0.0))
    }

    /// Node values `v(a h_x, b h_y)`, evaluated exactly from the Fourier series.
    pub fn apply(&self, v: &VelocityField) -> Result<ObservationVector> {
        self.check(v)?;
        Ok(ObservationVector {
            kind: ObservationKind::NodeValues,
            nx: self.partition.nx,
            ny: self.partition.ny,
            c1: self.samples(&v.u1),
            c2: self.samples(&v.u2),
        })
    }

    /// Periodic bilinear interpolant through the observed node values.
    pub fn lift(&self, obs: &ObservationVector) -> Result<BilinearField> {
        if obs.nx != self.partition.nx || obs.ny != self.partition.ny {
            return Err(Error::InvalidArgument("observation does not match lattice".into()));
        }
        Ok(BilinearField {
            partition: self.partition,
            v1: obs.c1.clone(),
            v2: obs.c2.clone(),
        })
    }
}

impl ObservationOperator for PointOperator {
    fn grid(&self) -> &GridSpec {
        &self.partition.grid
    }

    fn h(&self) -> f64 {
        self.partition.h()
    }

    fn c_omega(&self) -> f64 {
        self.c_omega_hat
    }

    fn class(&self) -> OperatorClass {
        OperatorClass::Laplacian
    }

    fn observe(&self, v: &VelocityField) -> Result<ObservationVector> {
        self.apply(v)
    }

    fn residual_sq(&self, v: &VelocityField) -> Result<f64> {
        let obs = self.apply(v)?;
        let p = &self.partition;
        let (nx, ny) = (p.nx, p.ny);
        let smooth = |f: &ScalarField| {
            p.sample_weighted(f, &|k1, k2| Complex64::new(hat_symbol(k1, k2, nx, ny), 0.0))
        };
        let cross = p.cell_area()
            * (dot(&obs.c1, &smooth(&v.u1)) + dot(&obs.c2, &smooth(&v.u2)));
        let b = self.lift(&obs)?.l2_norm_sq();
        Ok((v.l2_norm_sq() - 2.0 * cross + b).max(0.0))
    }

    fn output_norm(&self, v: &VelocityField) -> Result<f64> {
        Ok(self.lift(&self.apply(v)?)?.l2_norm())
    }

    fn inject(&self, v: &VelocityField) -> Result<VelocityField> {
        let b = self.lift(&self.apply(v)?)?;
        Ok(b.to_field(&self.partition.grid).leray_project())
    }

    fn diagonal_symbol(&self) -> Vec<f64> {
        let g = &self.partition.grid;
        (0..g.len())
            .map(|idx| {
                let (k1, k2) = g.mode(idx);
                if !g.in_band(idx) || (k1, k2) == (0, 0) {
                    return 0.0;
                }
                hat_symbol(k1, k2, self.partition.nx, self.partition.ny)
            })
            .collect()
    }

    fn aliasing_free(&self) -> bool {
        self.partition.resolves_band()
    }

    fn label(&self) -> String {
        format!("point-{}x{}", self.partition.nx, self.partition.ny)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Periodic bilinear interpolant of node values on a uniform lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct BilinearField {
    pub partition: Partition,
    pub v1: Vec<f64>,
    pub v2: Vec<f64>,
}

impl BilinearField {
    pub fn eval(&self, x: f64, y: f64) -> (f64, f64) {
        let p = &self.partition;
        let (nx, ny) = (p.nx, p.ny);
        let sx = x.rem_euclid(p.grid.ell1) / p.hx();
        let sy = y.rem_euclid(p.grid.ell2) / p.hy();
        let (a, b) = ((sx.floor() as usize).min(nx - 1), (sy.floor() as usize).min(ny - 1));
        let (tx, ty) = (sx - a as f64, sy - b as f64);
        let (a1, b1) = ((a + 1) % nx, (b + 1) % ny);
        let w = [
            (a, b, (1.0 - tx) * (1.0 - ty)),
            (a1, b, tx * (1.0 - ty)),
            (a, b1, (1.0 - tx) * ty),
            (a1, b1, tx * ty),
        ];
        let (mut u1, mut u2) = (0.0, 0.0);
        for (i, j, c) in w {
            u1 += c * self.v1[i * ny + j];
            u2 += c * self.v2[i * ny + j];
        }
        (u1, u2)
    }

    /// Exact `‖·‖²_{L²}` through the tensor hat mass matrix `(h/6)[1 4 1]`.
    pub fn l2_norm_sq(&self) -> f64 {
        mass_form(&self.partition, &self.v1) + mass_form(&self.partition, &self.v2)
    }

    pub fn l2_norm(&self) -> f64 {
        self.l2_norm_sq().sqrt()
    }

    fn coeffs(&self, values: &[f64], grid: &GridSpec) -> Vec<Complex64> {
        let (nx, ny) = (self.partition.nx, self.partition.ny);
        self.partition
            .synthesize(values, grid, &|k1, k2| Complex64::new(hat_symbol(k1, k2, nx, ny), 0.0))
    }

    /// Fourier series on `grid`, truncated to the dealiasing band.
    pub fn to_field(&self, grid: &GridSpec) -> VelocityField {
        self.to_field_unbanded(grid).truncate_band()
    }

    pub fn to_field_unbanded(&self, grid: &GridSpec) -> VelocityField {
        VelocityField {
            u1: ScalarField::from_coeffs_unchecked(*grid, self.coeffs(&self.v1, grid)),
            u2: ScalarField::from_coeffs_unchecked(*grid, self.coeffs(&self.v2, grid)),
        }
    }
}

/// `vᵀ (M_x ⊗ M_y) v` with periodic 1D hat mass matrices.
fn mass_form(p: &Partition, v: &[f64]) -> f64 {
    let (nx, ny) = (p.nx, p.ny);
    let apply = |w: &[f64], n: usize, stride: usize, len: usize| -> Vec<f64> {
        let mut out = vec![0.0; w.len()];
        for line in 0..len {
            let base = if stride == 1 { line * n } else { line };
            for i in 0..n {
                let prev = (i + n - 1) % n;
                let next = (i + 1) % n;
                out[base + i * stride] = (w[base + prev * stride]
                    + 4.0 * w[base + i * stride]
                    + w[base + next * stride])
                    / 6.0;
            }
        }
        out
    };
    let my = apply(v, ny, 1, nx);
    let mxy = apply(&my, nx, ny, ny);
    p.cell_area() * dot(v, &mxy)
}
