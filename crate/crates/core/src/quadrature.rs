//! One-dimensional numerical integration and maximisation helpers.

use crate::{Error, Result};

/// Adaptive Simpson quadrature of `f` on `[a, b]` to absolute tolerance `tol`.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let (fa, fb) = (f(a), f(b));
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(f, a, b, fa, fm, fb, whole, tol, 60)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> Result<f64> {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    // Below the round-off level of the panel sum further bisection cannot help.
    let floor = 64.0 * f64::EPSILON * (left.abs() + right.abs());
    if delta.abs() <= (15.0 * tol).max(floor) || (b - a).abs() <= f64::EPSILON * a.abs().max(b.abs()) {
        return Ok(left + right + delta / 15.0);
    }
    if depth == 0 || !delta.is_finite() {
        return Err(Error::Quadrature { a, b });
    }
    Ok(simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)?
        + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)?)
}

/// Trapezoidal integral of samples `y` at abscissae `x`.
pub fn trapezoid(x: &[f64], y: &[f64]) -> f64 {
    x.windows(2)
        .zip(y.windows(2))
        .map(|(xs, ys)| 0.5 * (xs[1] - xs[0]) * (ys[0] + ys[1]))
        .sum()
}

/// Golden-section search for a maximiser of `f` on `[a, b]`, stopping when
/// the bracket is narrower than `tol · max(|a|, |b|, 1)`.
pub fn golden_section_max(f: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..400 {
        if (b - a).abs() <= tol * a.abs().max(b.abs()).max(1.0) {
            break;
        }
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    if fc >= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// `count` points spaced uniformly in `log` between `lo` and `hi` inclusive.
pub fn logspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.ln(), hi.ln());
            (0..count)
                .map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp())
                .collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simpson_integrates_arctan_kernel() {
        let v = adaptive_simpson(&|x| 1.0 / (1.0 + x * x), 0.0, 3.0, 1e-12).unwrap();
        assert!((v - 3f64.atan()).abs() < 1e-11);
        assert_eq!(adaptive_simpson(&|x| x, 2.0, 2.0, 1e-12).unwrap(), 0.0);
    }

    #[test]
    fn simpson_reports_non_convergence() {
        let r = adaptive_simpson(&|x| if x > 0.0 { 1.0 / x } else { f64::NAN }, 0.0, 1.0, 1e-10);
        assert!(r.is_err());
    }

    #[test]
    fn golden_section_finds_interior_peak() {
        let (x, fx) = golden_section_max(&|x| -(x - 1.3).powi(2) + 2.0, 0.0, 5.0, 1e-10);
        assert!((x - 1.3).abs() < 1e-6);
        assert!((fx - 2.0).abs() < 1e-12);
    }

    #[test]
    fn trapezoid_is_exact_for_linear_data() {
        let x = [0.0, 0.5, 2.0];
        let y = [1.0, 2.0, 5.0];
        assert!((trapezoid(&x, &y) - 6.0).abs() < 1e-15);
    }

    #[test]
    fn logspace_endpoints() {
        let v = logspace(1e-2, 1e4, 20);
        assert_eq!(v.len(), 20);
        assert!((v[0] - 1e-2).abs() < 1e-16 && (v[19] - 1e4).abs() < 1e-9);
    }
}
