//! Pseudospectral simulation and state estimation for the 2D periodic
//! Navier-Stokes equations.
//!
//! The crate is organised bottom-up:
//!
//! * [`spectral`] – Fourier representation of periodic fields, Leray
//!   projection, Stokes operator, norms and the trilinear form `b`.
//! * [`solver`] – implicit-midpoint time integration of the projected
//!   equations, forcing and initial-condition constructors, energy audits.
//! * [`observation`] – partition-average and point-sampling observation
//!   operators together with their class certificates.
//! * [`observer`] – Luenberger observer twin runs and the Bellman-lemma
//!   trace diagnostic.
//! * [`gain`] – closed-form design quantities, the `Θ(Γ)` maximisation and
//!   the comparison against the Brezis-based resolution bound.
//! * [`inequality`] – randomized verification of the `L∞` bounds and the
//!   interpolation inequalities the design relies on.

pub mod error;
pub mod gain;
pub mod inequality;
pub mod observation;
pub mod observer;
pub mod quadrature;
pub mod solver;
pub mod spectral;

pub use error::{Error, Result};
pub use spectral::{GridSpec, NormReport, ScalarField, VelocityField};
