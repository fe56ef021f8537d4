//! Observation operators: cell averages over a uniform partition and point
//! samples on a uniform lattice, with their class certificates.

mod average;
mod certificate;
mod lattice;
mod point;

pub use average::{AverageOperator, PiecewiseField, NEUMANN_CELL_C_OMEGA, PERIODIC_CELL_C_OMEGA};
pub use certificate::{certify_class, CertificateReport, POINT_SAFETY_FACTOR};
pub use lattice::{ObservationKind, ObservationVector, Partition};
pub use point::{BilinearField, PointOperator};

use crate::gain::OperatorClass;
use crate::spectral::{GridSpec, VelocityField};
use crate::Result;

/// Common interface of the observation operators used by the observer.
pub trait ObservationOperator: Send + Sync {
    fn grid(&self) -> &GridSpec;

    /// Mesh size `h = max(ℓ₁/n_x, ℓ₂/n_y)`.
    fn h(&self) -> f64;

    /// Certificate constant `C_Ω` of the operator's class inequality.
    fn c_omega(&self) -> f64;

    fn class(&self) -> OperatorClass;

    fn observe(&self, v: &VelocityField) -> Result<ObservationVector>;

    /// `‖v − Cv‖²_{L²}`, computed exactly.
    fn residual_sq(&self, v: &VelocityField) -> Result<f64>;

    /// `‖Cv‖_{L²}` of the reconstructed field, computed exactly.
    fn output_norm(&self, v: &VelocityField) -> Result<f64>;

    /// Leray-projected, band-limited reconstruction `P T (Cv)` used as the
    /// observer injection.
    fn inject(&self, v: &VelocityField) -> Result<VelocityField>;

    /// Diagonal of [`ObservationOperator::inject`] in Fourier space (one
    /// real value per stored mode, zero outside the band and at the mean).
    /// Exact when the lattice resolves the dealiasing band without aliasing,
    /// otherwise the dominant part.
    fn diagonal_symbol(&self) -> Vec<f64>;

    /// True when no two band modes share a lattice frequency, so that
    /// [`ObservationOperator::diagonal_symbol`] is the whole injection.
    fn aliasing_free(&self) -> bool;

    /// Short identifier used in reports.
    fn label(&self) -> String;
}
