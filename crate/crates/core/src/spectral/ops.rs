use num_complex::Complex64;

use super::scalar::spread_into;
use super::velocity::leray_coeffs;
use super::{fft2_forward, fft2_inverse, GridSpec, ScalarField, VelocityField};
use crate::{Error, Result};

/// Reusable buffers for repeated evaluation of the projected advection term.
pub(crate) struct NonlinearWorkspace {
    grid: GridSpec,
    packed: Vec<Complex64>,
    second: Vec<Complex64>,
}

impl NonlinearWorkspace {
    pub(crate) fn new(grid: GridSpec) -> Self {
        Self {
            grid,
            packed: vec![Complex64::default(); grid.len()],
            second: vec![Complex64::default(); grid.len()],
        }
    }

    /// Writes `P T ∇·(v ⊗ v)` for the band-truncated input `T v` into
    /// `(out1, out2)`; `T` is the dealiasing truncation and `P` the Leray
    /// projector. `v` is assumed divergence-free so that `∇·(v⊗v) = (v·∇)v`.
    pub(crate) fn eval(
        &mut self,
        a: &[Complex64],
        b: &[Complex64],
        out1: &mut [Complex64],
        out2: &mut [Complex64],
    ) {
        let g = self.grid;
        let (n1, n2) = (g.n1, g.n2);
        let n = g.len();
        let i = Complex64::i();

        // u1 + i u2 in one inverse transform.
        for idx in 0..n {
            self.packed[idx] = if g.in_band(idx) {
                a[idx] + i * b[idx]
            } else {
                Complex64::default()
            };
        }
        fft2_inverse(&mut self.packed, n1, n2);

        // u1² + i u1u2 and u2² as two forward transforms.
        let inv = 1.0 / n as f64;
        for idx in 0..n {
            let (u, v) = (self.packed[idx].re, self.packed[idx].im);
            self.packed[idx] = Complex64::new(u * u * inv, u * v * inv);
            self.second[idx] = Complex64::new(v * v * inv, 0.0);
        }
        fft2_forward(&mut self.packed, n1, n2);
        fft2_forward(&mut self.second, n1, n2);

        for idx in 0..n {
            if !g.in_band(idx) {
                out1[idx] = Complex64::default();
                out2[idx] = Complex64::default();
                continue;
            }
            let (k1, k2) = g.mode(idx);
            let z = self.packed[idx];
            let zc = self.packed[g.offset(-k1, -k2)].conj();
            let uu = 0.5 * (z + zc);
            let uv = (z - zc) * Complex64::new(0.0, -0.5);
            let vv = self.second[idx];
            let (q1, q2) = g.wavevector(idx);
            out1[idx] = i * (uu * q1 + uv * q2);
            out2[idx] = i * (uv * q1 + vv * q2);
        }
        leray_coeffs(&g, out1, out2);
    }
}

/// Dealiased, Leray-projected advection term `P[(v·∇)v]`.
///
/// The input is truncated to the dealiasing band before the product is
/// formed and the result is truncated again, so quadratic interactions are
/// alias-free.
pub fn nonlinear_term(v: &VelocityField) -> VelocityField {
    let g = *v.grid();
    let mut out = VelocityField::zeros(g);
    nonlinear_term_into(v, &mut out);
    out
}

/// In-place variant of [`nonlinear_term`]; `out` must live on `v`'s grid.
pub fn nonlinear_term_into(v: &VelocityField, out: &mut VelocityField) {
    let mut ws = NonlinearWorkspace::new(*v.grid());
    let VelocityField { u1, u2 } = out;
    ws.eval(v.u1.coeffs(), v.u2.coeffs(), u1.coeffs_mut(), u2.coeffs_mut());
}

/// Trilinear form `b(u, w, φ) = Σᵢ ∫ (u·∇wᵢ) φᵢ`, evaluated on a grid refined
/// twice in each direction, which integrates band-limited cubic products
/// exactly.
pub fn bilinear_b(u: &VelocityField, w: &VelocityField, phi: &VelocityField) -> Result<f64> {
    u.check_grid(w)?;
    u.check_grid(phi)?;
    let g = *u.grid();
    let (m1, m2) = (2 * g.n1, 2 * g.n2);
    let sample = |f: &ScalarField| -> Vec<f64> {
        let mut buf = vec![Complex64::default(); m1 * m2];
        spread_into(f.coeffs(), g.n1, g.n2, &mut buf, m1, m2);
        fft2_inverse(&mut buf, m1, m2);
        buf.into_iter().map(|z| z.re).collect()
    };
    let a1 = sample(&u.u1);
    let a2 = sample(&u.u2);
    let mut total = 0.0;
    for (wi, pi) in [(&w.u1, &phi.u1), (&w.u2, &phi.u2)] {
        let dx = sample(&wi.dx());
        let dy = sample(&wi.dy());
        let p = sample(pi);
        let mut s = 0.0;
        for k in 0..m1 * m2 {
            s += (a1[k] * dx[k] + a2[k] * dy[k]) * p[k];
        }
        total += s;
    }
    Ok(total * g.area() / (m1 * m2) as f64)
}

/// Solves `Δψ = −ω` with `ψ` of zero mean. `ω` must have zero mean.
pub fn poisson_solve(omega: &ScalarField) -> Result<ScalarField> {
    let g = *omega.grid();
    let mean = omega.coeffs()[0].norm();
    let scale = omega.max_coeff();
    if mean > 1e-12 * scale.max(f64::MIN_POSITIVE) && mean > 0.0 {
        return Err(Error::NonzeroMean { mean });
    }
    let mut c = omega.coeffs().to_vec();
    c[0] = Complex64::default();
    for (idx, z) in c.iter_mut().enumerate().skip(1) {
        *z /= g.wavenumber_sq(idx);
    }
    Ok(ScalarField::from_coeffs_unchecked(g, c))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn taylor_green_advection_is_a_gradient() {
        let g = GridSpec::square(2.0 * PI, 32).unwrap();
        let v = VelocityField::from_fn(g, |x, y| -x.cos() * y.sin(), |x, y| x.sin() * y.cos());
        assert!(nonlinear_term(&v).l2_norm() < 1e-12);
        assert!(nonlinear_term(&VelocityField::zeros(g)).l2_norm() == 0.0);
    }

    #[test]
    fn advection_of_shear_by_mode_matches_closed_form() {
        // v = (sin 2y, sin x):  (v·∇)v = (2 sin x cos 2y, sin 2y cos x).
        let g = GridSpec::square(2.0 * PI, 32).unwrap();
        let v = VelocityField::from_fn(g, |_, y| (2.0 * y).sin(), |x, _| x.sin());
        let raw = VelocityField::from_fn(g, |x, y| 2.0 * x.sin() * (2.0 * y).cos(), |x, y| (2.0 * y).sin() * x.cos());
        let expect = raw.leray_project();
        let got = nonlinear_term(&v);
        assert!(got.sub(&expect).unwrap().l2_norm() < 1e-12);
        assert!(got.l2_norm() > 0.1);
    }

    #[test]
    fn poisson_inverts_sine_mode() {
        let g = GridSpec::square(2.0 * PI, 16).unwrap();
        let w = ScalarField::from_fn(g, |x, _| x.sin());
        let psi = poisson_solve(&w).unwrap();
        assert!(psi.sub(&w).unwrap().l2_norm() < 1e-13);
        assert!(poisson_solve(&ScalarField::zeros(g)).unwrap().l2_norm() == 0.0);
        let shifted = ScalarField::from_fn(g, |x, _| x.sin() + 1.0);
        assert!(matches!(poisson_solve(&shifted), Err(Error::NonzeroMean { .. })));
    }
}
