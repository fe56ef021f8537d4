//! Fourier representation of periodic fields on `[0, ℓ₁) × [0, ℓ₂)`.
//!
//! Coefficients follow the normalisation `û_k = (ℓ₁ℓ₂)⁻¹ ∫ u e^{-i k·x} dx`
//! with `k = 2π(k₁/ℓ₁, k₂/ℓ₂)`, so that `‖u‖²_{L²} = ℓ₁ℓ₂ Σ |û_k|²`.
//! Storage is the full (not half) spectrum in FFT order; signed index
//! accessors are provided on [`ScalarField`].

mod fft;
mod grid;
pub(crate) mod ops;
mod random;
mod scalar;
pub mod snapshot;
mod velocity;

pub use grid::GridSpec;
pub use ops::{bilinear_b, nonlinear_term, nonlinear_term_into, poisson_solve};
pub use random::{RandomFieldSpec, random_field, random_fields};
pub use scalar::ScalarField;
pub use velocity::{NormReport, VelocityField, DEFAULT_LINF_OVERSAMPLING};

pub(crate) use fft::{fft2_forward, fft2_inverse};
