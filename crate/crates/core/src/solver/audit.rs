use crate::gain::theta_tt_raw;
use crate::quadrature::trapezoid;
use crate::spectral::GridSpec;

use super::TrajectoryRecord;

/// Absolute slack allowed before an energy inequality counts as violated.
pub const AUDIT_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AuditKind {
    /// `‖u(t)‖² ≤ ‖f‖²/(νλ₁)² + e^{−λ₁ν(t−s)}‖u(s)‖²`.
    L2Decay,
    /// `‖∇u(t)‖² ≤ ‖f‖²/(ν²λ₁) + e^{−λ₁ν(t−s)}‖∇u(s)‖²`.
    GradDecay,
    /// `(1/T)∫_t^{t+T} ‖Au‖² ds ≤ θ_{t,T}`.
    StokesAverage,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AuditViolation {
    pub kind: AuditKind,
    pub s: f64,
    pub t: f64,
    pub lhs: f64,
    pub rhs: f64,
}

/// Result of checking the energy inequalities over all recorded time pairs.
/// Slacks are `rhs − lhs`; the worst (smallest) one is kept per inequality.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct EnergyAudit {
    pub pairs_checked: usize,
    pub worst_l2_slack: Option<f64>,
    pub worst_grad_slack: Option<f64>,
    pub worst_average_slack: Option<f64>,
    pub violations: Vec<AuditViolation>,
}

impl EnergyAudit {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks the decay bounds for every recorded pair `s < t` and the
/// time-averaged `‖Au‖²` bound for every window `[s, t]` (integrated with
/// the trapezoidal rule over the records, `‖∇u₀‖` taken from the first
/// record).
pub fn energy_audit(rec: &TrajectoryRecord, f_l2: f64, nu: f64, grid: &GridSpec) -> EnergyAudit {
    let mut audit = EnergyAudit::default();
    let n = rec.len();
    if n == 0 {
        return audit;
    }
    let lambda1 = grid.lambda1();
    let f2 = f_l2 * f_l2;
    let l2_floor = f2 / (nu * lambda1).powi(2);
    let grad_floor = f2 / (nu * nu * lambda1);
    let grad0_sq = rec.grad_l2[0].powi(2);
    let t0 = rec.times[0];
    let au_sq: Vec<f64> = rec.lap_l2.iter().map(|x| x * x).collect();

    let mut prefix = vec![0.0; n];
    for i in 1..n {
        prefix[i] = prefix[i - 1] + trapezoid(&rec.times[i - 1..=i], &au_sq[i - 1..=i]);
    }

    let note = |kind: AuditKind, s: f64, t: f64, lhs: f64, rhs: f64, worst: &mut Option<f64>| {
        let slack = rhs - lhs;
        *worst = Some(worst.map_or(slack, |w: f64| w.min(slack)));
        if slack < -AUDIT_SLACK {
            audit_violation(kind, s, t, lhs, rhs)
        } else {
            None
        }
    };

    let mut violations = Vec::new();
    let (mut wl2, mut wgr, mut wav) = (None, None, None);
    for i in 0..n {
        for j in i + 1..n {
            let (s, t) = (rec.times[i], rec.times[j]);
            let decay = (-lambda1 * nu * (t - s)).exp();
            let l = rec.l2[j].powi(2);
            let r = l2_floor + decay * rec.l2[i].powi(2);
            violations.extend(note(AuditKind::L2Decay, s, t, l, r, &mut wl2));
            let l = rec.grad_l2[j].powi(2);
            let r = grad_floor + decay * rec.grad_l2[i].powi(2);
            violations.extend(note(AuditKind::GradDecay, s, t, l, r, &mut wgr));
            let window = t - s;
            let l = (prefix[j] - prefix[i]) / window;
            let r = theta_tt_raw(f2, nu, lambda1, grad0_sq, s - t0, window);
            violations.extend(note(AuditKind::StokesAverage, s, t, l, r, &mut wav));
            audit.pairs_checked += 1;
        }
    }
    audit.worst_l2_slack = wl2;
    audit.worst_grad_slack = wgr;
    audit.worst_average_slack = wav;
    audit.violations = violations;
    audit
}

fn audit_violation(kind: AuditKind, s: f64, t: f64, lhs: f64, rhs: f64) -> Option<AuditViolation> {
    Some(AuditViolation { kind, s, t, lhs, rhs })
}
