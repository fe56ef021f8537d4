use std::f64::consts::PI;

use num_complex::Complex64;

use super::lattice::{cell_mean_factor, ObservationKind, ObservationVector, Partition};
use super::ObservationOperator;
use crate::gain::OperatorClass;
use crate::spectral::{GridSpec, ScalarField, VelocityField};
use crate::{Error, Result};

/// `1/(4π²)`: the Poincaré constant of mean-free *periodic* functions on a
/// cell of unit side. Cell restrictions of a periodic field are not periodic
/// on the cell, so this constant does not certify the averaging operator.
pub const PERIODIC_CELL_C_OMEGA: f64 = 1.0 / (4.0 * PI * PI);

/// `1/π²`: the Poincaré constant of mean-free functions on a convex cell of
/// diameter-like size `h` (Payne-Weinberger, Neumann case), which certifies
/// `‖u − Cu‖² ≤ h² C_Ω ‖∇u‖²` for cell averages on squares and rectangles of
/// longest side `h`.
pub const NEUMANN_CELL_C_OMEGA: f64 = 1.0 / (PI * PI);

/// Orthogonal projection onto fields that are constant on each cell of a
/// partition (cell means).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AverageOperator {
    pub partition: Partition,
    pub c_omega: f64,
}

impl AverageOperator {
    pub fn new(partition: Partition) -> Self {
        Self {
            partition,
            c_omega: NEUMANN_CELL_C_OMEGA,
        }
    }

    /// Overrides the certificate constant (e.g. to evaluate the design
    /// formulas with a prescribed `C_Ω`).
    pub fn with_c_omega(mut self, c_omega: f64) -> Self {
        self.c_omega = c_omega;
        self
    }

    fn check(&self, v: &VelocityField) -> Result<()> {
        if v.grid() != &self.partition.grid {
            return Err(Error::GridMismatch);
        }
        Ok(())
    }

    fn means(&self, f: &ScalarField) -> Vec<f64> {
        let p = &self.partition;
        p.sample_weighted(f, &|k1, k2| {
            cell_mean_factor(k1, p.nx) * cell_mean_factor(k2, p.ny)
        })
    }

    /// Cell means `(1/|Ω_j|) ∫_{Ω_j} v`, by exact quadrature of the Fourier series.
    pub fn apply(&self, v: &VelocityField) -> Result<ObservationVector> {
        self.check(v)?;
        Ok(ObservationVector {
            kind: ObservationKind::CellMeans,
            nx: self.partition.nx,
            ny: self.partition.ny,
            c1: self.means(&v.u1),
            c2: self.means(&v.u2),
        })
    }

    /// Piecewise-constant field taking the observed means on each cell.
    pub fn lift(&self, obs: &ObservationVector) -> Result<PiecewiseField> {
        if obs.nx != self.partition.nx || obs.ny != self.partition.ny {
            return Err(Error::InvalidArgument("observation does not match partition".into()));
        }
        Ok(PiecewiseField {
            partition: self.partition,
            v1: obs.c1.clone(),
            v2: obs.c2.clone(),
        })
    }
}

impl ObservationOperator for AverageOperator {
    fn grid(&self) -> &GridSpec {
        &self.partition.grid
    }

    fn h(&self) -> f64 {
        self.partition.h()
    }

    fn c_omega(&self) -> f64 {
        self.c_omega
    }

    fn class(&self) -> OperatorClass {
        OperatorClass::Gradient
    }

    fn observe(&self, v: &VelocityField) -> Result<ObservationVector> {
        self.apply(v)
    }

    fn residual_sq(&self, v: &VelocityField) -> Result<f64> {
        let c = self.output_norm(v)?;
        Ok((v.l2_norm_sq() - c * c).max(0.0))
    }

    fn output_norm(&self, v: &VelocityField) -> Result<f64> {
        Ok(self.lift(&self.apply(v)?)?.l2_norm())
    }

    fn inject(&self, v: &VelocityField) -> Result<VelocityField> {
        let pw = self.lift(&self.apply(v)?)?;
        Ok(pw.to_field(&self.partition.grid).leray_project())
    }

    fn diagonal_symbol(&self) -> Vec<f64> {
        let g = &self.partition.grid;
        (0..g.len())
            .map(|idx| {
                let (k1, k2) = g.mode(idx);
                if !g.in_band(idx) || (k1, k2) == (0, 0) {
                    return 0.0;
                }
                (cell_mean_factor(k1, self.partition.nx) * cell_mean_factor(k2, self.partition.ny))
                    .norm_sqr()
            })
            .collect()
    }

    fn aliasing_free(&self) -> bool {
        self.partition.resolves_band()
    }

    fn label(&self) -> String {
        format!("average-{}x{}", self.partition.nx, self.partition.ny)
    }
}

/// Vector field that is constant on each cell of a partition.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseField {
    pub partition: Partition,
    pub v1: Vec<f64>,
    pub v2: Vec<f64>,
}

impl PiecewiseField {
    /// Value at `(x, y)` (cells are closed on the left).
    pub fn eval(&self, x: f64, y: f64) -> (f64, f64) {
        let p = &self.partition;
        let a = ((x.rem_euclid(p.grid.ell1) / p.hx()).floor() as usize).min(p.nx - 1);
        let b = ((y.rem_euclid(p.grid.ell2) / p.hy()).floor() as usize).min(p.ny - 1);
        let k = a * p.ny + b;
        (self.v1[k], self.v2[k])
    }

    /// Exact `‖·‖²_{L²}`.
    pub fn l2_norm_sq(&self) -> f64 {
        self.partition.cell_area()
            * self
                .v1
                .iter()
                .zip(&self.v2)
                .map(|(a, b)| a * a + b * b)
                .sum::<f64>()
    }

    pub fn l2_norm(&self) -> f64 {
        self.l2_norm_sq().sqrt()
    }

    /// Exact cell means over another partition of the same domain.
    pub fn cell_means(&self, target: &Partition) -> ObservationVector {
        let src = &self.partition;
        let wx = overlap_weights(src.nx, target.nx);
        let wy = overlap_weights(src.ny, target.ny);
        let mut c1 = vec![0.0; target.cells()];
        let mut c2 = vec![0.0; target.cells()];
        for (ta, row) in wx.iter().enumerate() {
            for (tb, col) in wy.iter().enumerate() {
                let (mut s1, mut s2) = (0.0, 0.0);
                for &(sa, fa) in row {
                    for &(sb, fb) in col {
                        let k = sa * src.ny + sb;
                        s1 += fa * fb * self.v1[k];
                        s2 += fa * fb * self.v2[k];
                    }
                }
                c1[ta * target.ny + tb] = s1;
                c2[ta * target.ny + tb] = s2;
            }
        }
        ObservationVector {
            kind: ObservationKind::CellMeans,
            nx: target.nx,
            ny: target.ny,
            c1,
            c2,
        }
    }

    fn coeffs(&self, values: &[f64], grid: &GridSpec) -> Vec<Complex64> {
        let p = &self.partition;
        p.synthesize(values, grid, &|k1, k2| {
            (cell_mean_factor(k1, p.nx) * cell_mean_factor(k2, p.ny)).conj()
        })
    }

    /// Fourier series on `grid`, truncated to the dealiasing band.
    pub fn to_field(&self, grid: &GridSpec) -> VelocityField {
        self.to_field_unbanded(grid).truncate_band()
    }

    /// Fourier series on `grid` keeping every mode below the Nyquist index.
    pub fn to_field_unbanded(&self, grid: &GridSpec) -> VelocityField {
        VelocityField {
            u1: ScalarField::from_coeffs_unchecked(*grid, self.coeffs(&self.v1, grid)),
            u2: ScalarField::from_coeffs_unchecked(*grid, self.coeffs(&self.v2, grid)),
        }
    }
}

/// For each of `m` target intervals of `[0, 1)`, the source intervals of an
/// `n`-interval partition that overlap it and the overlap fraction relative
/// to the target length.
fn overlap_weights(n: usize, m: usize) -> Vec<Vec<(usize, f64)>> {
    // Work in units of 1/(n·m) so that every boundary is an integer.
    (0..m)
        .map(|t| {
            let (lo, hi) = (t * n, (t + 1) * n);
            let mut out = Vec::new();
            let first = lo / m;
            let last = (hi - 1) / m;
            for s in first..=last {
                let (slo, shi) = (s * m, (s + 1) * m);
                let ov = hi.min(shi) - lo.max(slo);
                if ov > 0 {
                    out.push((s, ov as f64 / n as f64));
                }
            }
            out
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn half_domain_means_of_sine() {
        let g = GridSpec::square(2.0 * PI, 16).unwrap();
        let op = AverageOperator::new(Partition::new(g, 2, 1).unwrap());
        let v = VelocityField::from_fn(g, |x, _| 3.0 * x.sin(), |_, _| 0.0);
        let o = op.apply(&v).unwrap();
        assert!((o.c1[0] - 3.0 * 2.0 / PI).abs() < 1e-14);
        assert!((o.c1[1] + 3.0 * 2.0 / PI).abs() < 1e-14);
    }

    #[test]
    fn constants_and_whole_domain_means() {
        let g = GridSpec::new(2.0, 3.0, 16, 12).unwrap();
        let v = VelocityField::from_fn(g, |_, _| 1.5, |_, _| -0.25);
        let o = AverageOperator::new(Partition::new(g, 5, 3).unwrap()).apply(&v).unwrap();
        assert!(o.c1.iter().all(|c| (c - 1.5).abs() < 1e-14));
        assert!(o.c2.iter().all(|c| (c + 0.25).abs() < 1e-14));
        let tg = VelocityField::from_fn(g, |x, y| (PI * x).cos() * (2.0 * PI * y / 3.0).sin(), |_, _| 0.0);
        let o = AverageOperator::new(Partition::new(g, 1, 1).unwrap()).apply(&tg).unwrap();
        assert!(o.c1[0].abs() < 1e-15);
    }

    #[test]
    fn overlap_weights_partition_unity() {
        for (n, m) in [(3usize, 7usize), (4, 2), (2, 4), (5, 5)] {
            for row in overlap_weights(n, m) {
                let s: f64 = row.iter().map(|x| x.1).sum();
                assert!((s - 1.0).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn exact_means_of_piecewise_field() {
        let g = GridSpec::square(1.0, 8).unwrap();
        let p = Partition::new(g, 2, 2).unwrap();
        let pw = PiecewiseField {
            partition: p,
            v1: vec![1.0, 2.0, 3.0, 4.0],
            v2: vec![0.0; 4],
        };
        let coarse = pw.cell_means(&Partition::new(g, 1, 1).unwrap());
        assert!((coarse.c1[0] - 2.5).abs() < 1e-15);
        let same = pw.cell_means(&p);
        assert_eq!(same.c1, pw.v1);
        assert_eq!(pw.eval(0.75, 0.25), (3.0, 0.0));
        assert!((pw.l2_norm_sq() - 30.0 / 4.0).abs() < 1e-15);
    }
}
