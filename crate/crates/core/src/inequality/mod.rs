//! Randomized verification of the `L∞` bounds, the appendix integrals and
//! the interpolation inequalities used by the gain design.

mod appendix;
mod audit;
mod bounds;

pub use appendix::{
    check_appendix_integrals, i1_bound, i1_polar, i1_radial, i1_without_jacobian, i2_formula, i2_quadrature,
    AppendixRow, APPENDIX_QUAD_TOL,
};
pub use audit::{
    check_agmon_n, check_corollaries, check_prop1_ingredients, default_gammas, evaluate_single, run_audit,
    AuditSelection, Check, CheckSummary, Evaluation, InequalityReport, INEQUALITY_SLACK, SUBSTITUTION_TOL,
    VIOLATION_HEADER,
};
pub use bounds::{
    agmon_gamma, agmon_n_rhs, agmon_n_rhs_linearized, agmon_rhs, brezis_gamma, brezis_rhs, tail_constant,
};
