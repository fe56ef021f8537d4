use std::fmt::Write as _;

use rayon::prelude::*;

use super::bounds::{agmon_gamma, agmon_n_rhs, agmon_n_rhs_linearized, agmon_rhs, brezis_gamma, brezis_rhs};
use crate::observation::{AverageOperator, ObservationOperator};
use crate::quadrature::logspace;
use crate::spectral::{random_field, GridSpec, RandomFieldSpec, VelocityField, DEFAULT_LINF_OVERSAMPLING};
use crate::Result;

pub const VIOLATION_HEADER: &str = "check,seed,field_id,gamma,lhs,rhs,margin";

/// Relative slack granted to every inequality for round-off.
pub const INEQUALITY_SLACK: f64 = 1e-12;

/// Relative tolerance of the corollary substitution identities.
pub const SUBSTITUTION_TOL: f64 = 1e-12;

/// 20 log-spaced values in `[1e−2, 1e4]`.
pub fn default_gammas() -> Vec<f64> {
    logspace(1e-2, 1e4, 20)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Check {
    AgmonN,
    Agmon,
    Brezis,
    Poincare,
    GradA,
    Interpolation,
    InterpolationWithOperator,
}

impl Check {
    pub const ALL: [Check; 7] = [
        Check::AgmonN,
        Check::Agmon,
        Check::Brezis,
        Check::Poincare,
        Check::GradA,
        Check::Interpolation,
        Check::InterpolationWithOperator,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Check::AgmonN => "agmon_n",
            Check::Agmon => "agmon",
            Check::Brezis => "brezis",
            Check::Poincare => "poincare",
            Check::GradA => "grad_a",
            Check::Interpolation => "interpolation",
            Check::InterpolationWithOperator => "interpolation_operator",
        }
    }
}

/// One evaluation `lhs ≤ rhs`; `margin = rhs − lhs`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    pub check: Check,
    pub seed: u64,
    pub field_id: u64,
    /// `γ` for the `L∞` bounds, NaN otherwise.
    pub gamma: f64,
    pub lhs: f64,
    pub rhs: f64,
}

impl Evaluation {
    pub fn margin(&self) -> f64 {
        self.rhs - self.lhs
    }

    pub fn violated(&self) -> bool {
        self.lhs > self.rhs * (1.0 + INEQUALITY_SLACK) + f64::MIN_POSITIVE
    }

    /// `margin / rhs` (`+∞` for a vacuous `0 ≤ 0`).
    pub fn relative_margin(&self) -> f64 {
        if self.rhs > 0.0 {
            self.margin() / self.rhs
        } else if self.lhs <= 0.0 {
            f64::INFINITY
        } else {
            f64::NEG_INFINITY
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckSummary {
    pub check: Check,
    pub evaluations: usize,
    pub violations: usize,
    /// Smallest relative margin observed.
    pub worst_relative_margin: f64,
}

/// Results of a randomized inequality audit.
#[derive(Debug, Clone, PartialEq)]
pub struct InequalityReport {
    pub seed: u64,
    pub fields: usize,
    pub gammas: Vec<f64>,
    pub summaries: Vec<CheckSummary>,
    pub violations: Vec<Evaluation>,
    /// Largest relative deviation of the corollary substitution identities.
    pub substitution_deviation: f64,
    pub notices: Vec<String>,
}

impl InequalityReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty() && self.substitution_deviation <= SUBSTITUTION_TOL
    }

    pub fn summary(&self, check: Check) -> Option<&CheckSummary> {
        self.summaries.iter().find(|s| s.check == check)
    }

    pub fn violations_csv(&self) -> String {
        let mut s = String::from(VIOLATION_HEADER);
        s.push('\n');
        for v in &self.violations {
            let _ = writeln!(
                s,
                "{},{},{},{:.17e},{:.17e},{:.17e},{:.17e}",
                v.check.name(),
                v.seed,
                v.field_id,
                v.gamma,
                v.lhs,
                v.rhs,
                v.margin()
            );
        }
        s
    }
}

/// Which groups of checks to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AuditSelection {
    pub agmon_n: bool,
    pub corollaries: bool,
    pub prop1: bool,
}

impl AuditSelection {
    pub const ALL: Self = Self {
        agmon_n: true,
        corollaries: true,
        prop1: true,
    };
}

struct FieldResult {
    evals: Vec<Evaluation>,
    deviation: f64,
    notice: Option<String>,
}

fn evaluate_field(
    grid: &GridSpec,
    spec: &RandomFieldSpec,
    id: u64,
    gammas: &[f64],
    op: Option<&AverageOperator>,
    sel: AuditSelection,
) -> Result<FieldResult> {
    let u = random_field(*grid, spec, id)?;
    let mut out = FieldResult {
        evals: Vec::new(),
        deviation: 0.0,
        notice: None,
    };
    let eval = |check, gamma, lhs, rhs| Evaluation {
        check,
        seed: spec.seed,
        field_id: id,
        gamma,
        lhs,
        rhs,
    };
    let h1 = u.h1_norm();
    let lap = u.lap_norm();
    if sel.agmon_n || sel.corollaries {
        let linf = u.linf_sampled(DEFAULT_LINF_OVERSAMPLING)?;
        if sel.agmon_n {
            for &g in gammas {
                out.evals.push(eval(Check::AgmonN, g, linf, agmon_n_rhs(grid, h1, lap, g)));
            }
        }
        if sel.corollaries {
            if h1 == 0.0 || lap == 0.0 {
                out.notice = Some(format!("field {id}: zero norm, corollaries skipped"));
            } else {
                let ga = agmon_gamma(h1, lap);
                let gb = brezis_gamma(h1, lap);
                let agmon = agmon_rhs(grid, h1, lap);
                let brezis = brezis_rhs(grid, h1, lap);
                out.evals.push(eval(Check::AgmonN, ga, linf, agmon_n_rhs(grid, h1, lap, ga)));
                out.evals.push(eval(Check::AgmonN, gb, linf, agmon_n_rhs(grid, h1, lap, gb)));
                out.evals.push(eval(Check::Agmon, ga, linf, agmon));
                out.evals.push(eval(Check::Brezis, gb, linf, brezis));
                let rel = |a: f64, b: f64| (a - b).abs() / a.abs().max(b.abs());
                out.deviation = rel(agmon, agmon_n_rhs_linearized(grid, h1, lap, ga))
                    .max(rel(brezis, agmon_n_rhs(grid, h1, lap, gb)));
                // The linearised log only loosens the bound at the Agmon γ.
                out.evals.push(eval(Check::Agmon, ga, agmon_n_rhs(grid, h1, lap, ga), agmon));
            }
        }
    }
    if sel.prop1 {
        let l2 = u.l2_norm();
        let grad_sq = u.grad_norm_sq();
        let lambda1 = grid.lambda1();
        let nan = f64::NAN;
        out.evals.push(eval(Check::Poincare, nan, lambda1 * l2 * l2, grad_sq));
        out.evals.push(eval(Check::GradA, nan, lambda1 * grad_sq, lap * lap));
        out.evals.push(eval(Check::Interpolation, nan, grad_sq, l2 * lap));
        if let Some(op) = op {
            let ce = op.output_norm(&u)?;
            let rhs = ce * lap + op.h() * op.c_omega().sqrt() / lambda1.sqrt() * lap * lap;
            out.evals.push(eval(Check::InterpolationWithOperator, nan, grad_sq, rhs));
        }
    }
    Ok(out)
}

/// Runs the selected checks on `spec.count` random fields (field ids
/// `0..count`), in parallel over fields with deterministic ordering.
pub fn run_audit(
    grid: &GridSpec,
    spec: &RandomFieldSpec,
    gammas: &[f64],
    op: Option<&AverageOperator>,
    sel: AuditSelection,
) -> Result<InequalityReport> {
    let results: Vec<FieldResult> = (0..spec.count as u64)
        .into_par_iter()
        .map(|id| evaluate_field(grid, spec, id, gammas, op, sel))
        .collect::<Result<_>>()?;
    let mut summaries: Vec<CheckSummary> = Check::ALL
        .iter()
        .map(|&check| CheckSummary {
            check,
            evaluations: 0,
            violations: 0,
            worst_relative_margin: f64::INFINITY,
        })
        .collect();
    let mut violations = Vec::new();
    let mut deviation = 0.0_f64;
    let mut notices = Vec::new();
    for r in results {
        deviation = deviation.max(r.deviation);
        notices.extend(r.notice);
        for e in r.evals {
            let s = &mut summaries[Check::ALL.iter().position(|c| *c == e.check).expect("listed")];
            s.evaluations += 1;
            s.worst_relative_margin = s.worst_relative_margin.min(e.relative_margin());
            if e.violated() {
                s.violations += 1;
                violations.push(e);
            }
        }
    }
    summaries.retain(|s| s.evaluations > 0);
    Ok(InequalityReport {
        seed: spec.seed,
        fields: spec.count,
        gammas: gammas.to_vec(),
        summaries,
        violations,
        substitution_deviation: deviation,
        notices,
    })
}

/// `‖u‖_{L∞} ≤ RHS(γ)` for every field and `γ`.
pub fn check_agmon_n(grid: &GridSpec, spec: &RandomFieldSpec, gammas: &[f64]) -> Result<InequalityReport> {
    run_audit(
        grid,
        spec,
        gammas,
        None,
        AuditSelection {
            agmon_n: true,
            corollaries: false,
            prop1: false,
        },
    )
}

/// Agmon- and Brezis-type bounds with their substitution identities.
pub fn check_corollaries(grid: &GridSpec, spec: &RandomFieldSpec) -> Result<InequalityReport> {
    run_audit(
        grid,
        spec,
        &[],
        None,
        AuditSelection {
            agmon_n: false,
            corollaries: true,
            prop1: false,
        },
    )
}

/// Poincaré, `‖Au‖² ≥ λ₁‖∇u‖²`, `‖∇u‖² ≤ ‖u‖‖Au‖` and the operator
/// interpolation bound `‖∇e‖² ≤ ‖Ce‖‖Ae‖ + hC_Ω^{1/2}λ₁^{−1/2}‖Ae‖²`.
pub fn check_prop1_ingredients(
    grid: &GridSpec,
    spec: &RandomFieldSpec,
    op: &AverageOperator,
) -> Result<InequalityReport> {
    run_audit(
        grid,
        spec,
        &[],
        Some(op),
        AuditSelection {
            agmon_n: false,
            corollaries: false,
            prop1: true,
        },
    )
}

/// Single-field variant used for hand-built fields.
pub fn evaluate_single(
    u: &VelocityField,
    gammas: &[f64],
) -> Result<Vec<(f64, f64, f64)>> {
    let g = u.grid();
    let (h1, lap) = (u.h1_norm(), u.lap_norm());
    let linf = u.linf_sampled(DEFAULT_LINF_OVERSAMPLING)?;
    Ok(gammas.iter().map(|&gm| (gm, linf, agmon_n_rhs(g, h1, lap, gm))).collect())
}
