use super::ObservationOperator;
use crate::gain::OperatorClass;
use crate::spectral::VelocityField;
use crate::{Error, Result};

/// Multiplier applied to the largest observed ratio when calibrating the
/// point-operator constant.
pub const POINT_SAFETY_FACTOR: f64 = 1.5;

/// Observed ratios `‖u − Cu‖² / (h² C_Ω ‖D u‖²)`, with `D = ∇` for the
/// gradient class and `D = Δ` for the Laplacian class.
#[derive(Debug, Clone, PartialEq)]
pub struct CertificateReport {
    pub label: String,
    pub class: OperatorClass,
    pub h: f64,
    pub c_omega: f64,
    pub samples: usize,
    /// Largest ratio; `≤ 1` certifies the operator on the sample set.
    pub max_ratio: f64,
    pub mean_ratio: f64,
    pub worst_index: usize,
    /// Samples whose ratio exceeds 1.
    pub violations: usize,
}

impl CertificateReport {
    pub fn passed(&self) -> bool {
        self.violations == 0 && self.max_ratio <= 1.0
    }
}

/// Evaluates the class inequality of `op` on every sample.
pub fn certify_class(op: &dyn ObservationOperator, samples: &[VelocityField]) -> Result<CertificateReport> {
    if samples.is_empty() {
        return Err(Error::InvalidArgument("certificate needs at least one sample field".into()));
    }
    let h2c = op.h() * op.h() * op.c_omega();
    let class = op.class();
    let mut max_ratio = 0.0_f64;
    let mut sum = 0.0;
    let mut worst_index = 0;
    let mut violations = 0;
    let mut counted = 0usize;
    for (i, u) in samples.iter().enumerate() {
        let denom = match class {
            OperatorClass::Gradient => u.grad_norm_sq(),
            OperatorClass::Laplacian => u.lap_norm_sq(),
        } * h2c;
        if denom == 0.0 {
            continue;
        }
        let ratio = op.residual_sq(u)? / denom;
        counted += 1;
        sum += ratio;
        if ratio > 1.0 {
            violations += 1;
        }
        if ratio > max_ratio {
            max_ratio = ratio;
            worst_index = i;
        }
    }
    Ok(CertificateReport {
        label: op.label(),
        class,
        h: op.h(),
        c_omega: op.c_omega(),
        samples: samples.len(),
        max_ratio,
        mean_ratio: if counted > 0 { sum / counted as f64 } else { 0.0 },
        worst_index,
        violations,
    })
}
