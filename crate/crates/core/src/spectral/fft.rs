//! Unnormalised 2D FFTs over row-major `n1 × n2` arrays with per-thread plan caching.

use std::cell::RefCell;
use std::collections::HashMap;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftDirection, FftPlanner};

struct Cache {
    planner: FftPlanner<f64>,
    plans: HashMap<(usize, bool), Arc<dyn Fft<f64>>>,
    scratch: Vec<Complex64>,
    transpose: Vec<Complex64>,
}

thread_local! {
    static CACHE: RefCell<Cache> = RefCell::new(Cache {
        planner: FftPlanner::new(),
        plans: HashMap::new(),
        scratch: Vec::new(),
        transpose: Vec::new(),
    });
}

impl Cache {
    fn plan(&mut self, n: usize, forward: bool) -> Arc<dyn Fft<f64>> {
        let planner = &mut self.planner;
        self.plans
            .entry((n, forward))
            .or_insert_with(|| {
                let dir = if forward {
                    FftDirection::Forward
                } else {
                    FftDirection::Inverse
                };
                planner.plan_fft(n, dir)
            })
            .clone()
    }
}

fn transform(data: &mut [Complex64], n1: usize, n2: usize, forward: bool) {
    assert_eq!(data.len(), n1 * n2);
    CACHE.with(|c| {
        let c = &mut *c.borrow_mut();
        let rows = c.plan(n2, forward);
        let cols = c.plan(n1, forward);
        let need = rows
            .get_inplace_scratch_len()
            .max(cols.get_inplace_scratch_len());
        if c.scratch.len() < need {
            c.scratch.resize(need, Complex64::default());
        }
        rows.process_with_scratch(data, &mut c.scratch[..rows.get_inplace_scratch_len()]);

        c.transpose.resize(n1 * n2, Complex64::default());
        transpose(data, &mut c.transpose, n1, n2);
        cols.process_with_scratch(
            &mut c.transpose,
            &mut c.scratch[..cols.get_inplace_scratch_len()],
        );
        transpose(&c.transpose, data, n2, n1);
    });
}

/// Transpose row-major `rows × cols` `src` into `dst` (`cols × rows`).
fn transpose(src: &[Complex64], dst: &mut [Complex64], rows: usize, cols: usize) {
    const B: usize = 32;
    for ib in (0..rows).step_by(B) {
        for jb in (0..cols).step_by(B) {
            for i in ib..(ib + B).min(rows) {
                for j in jb..(jb + B).min(cols) {
                    dst[j * rows + i] = src[i * cols + j];
                }
            }
        }
    }
}

/// In-place forward transform, `X_k = Σ_x x_x e^{-2πi k·x/n}` (no scaling).
pub(crate) fn fft2_forward(data: &mut [Complex64], n1: usize, n2: usize) {
    transform(data, n1, n2, true);
}

/// In-place inverse transform, `x_x = Σ_k X_k e^{+2πi k·x/n}` (no scaling).
pub(crate) fn fft2_inverse(data: &mut [Complex64], n1: usize, n2: usize) {
    transform(data, n1, n2, false);
}
