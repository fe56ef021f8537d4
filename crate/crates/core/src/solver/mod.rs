//! Time integration of the Leray-projected Navier-Stokes equations.

mod audit;
mod forcing;
mod initial;
pub(crate) mod integrator;
mod trajectory;

pub use audit::{energy_audit, AuditKind, AuditViolation, EnergyAudit, AUDIT_SLACK};
pub use forcing::{
    bounded_perturbation, kolmogorov_forcing, Forcing, ForcingKind, ForcingSpec, PerturbationSpec,
};
pub use initial::{peaks, peaks_initial_condition, peaks_vorticity, taylor_green, taylor_green_rate};
pub use integrator::{implicit_midpoint_step, rhs, Integrator, SolverConfig, StepStats};
pub use trajectory::{simulate, simulate_with, TrajectoryRecord, TRAJECTORY_HEADER};
