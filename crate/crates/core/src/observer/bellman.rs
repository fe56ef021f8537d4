use crate::{Error, Result};

/// Decision thresholds of the three window conditions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BellmanThresholds {
    /// Tail window average of `max(β, 0)` must not exceed this.
    pub beta_tol: f64,
    /// Tail window average of `α` must exceed this (`≥ 0`).
    pub alpha_min: f64,
    /// Tail window average of `max(0, −α)` must not exceed this.
    pub alpha_minus_max: f64,
    /// Fraction of the admissible window starts treated as the tail.
    pub tail_fraction: f64,
}

impl Default for BellmanThresholds {
    fn default() -> Self {
        Self {
            beta_tol: 1e-12,
            alpha_min: 0.0,
            alpha_minus_max: 1e12,
            tail_fraction: 0.5,
        }
    }
}

/// Window averages starting at `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BellmanWindow {
    pub t: f64,
    pub beta_plus: f64,
    pub alpha: f64,
    pub alpha_minus: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BellmanReport {
    pub window: f64,
    pub windows: Vec<BellmanWindow>,
    /// Largest tail average of `max(β, 0)` (limsup proxy).
    pub tail_beta_plus: f64,
    /// Smallest tail average of `α` (liminf proxy).
    pub tail_alpha: f64,
    /// Largest tail average of `max(0, −α)` (limsup proxy).
    pub tail_alpha_minus: f64,
    pub beta_condition: bool,
    pub alpha_condition: bool,
    pub alpha_minus_condition: bool,
    /// `V(end) / V(0)`.
    pub v_ratio: f64,
}

impl BellmanReport {
    pub fn all_conditions(&self) -> bool {
        self.beta_condition && self.alpha_condition && self.alpha_minus_condition
    }
}

/// Sliding-window averages `(1/T)∫_t^{t+T}` of `max(β,0)`, `α` and
/// `max(0,−α)` on a uniform time series, with verdicts on the tail.
pub fn bellman_diagnostic(
    times: &[f64],
    v: &[f64],
    alpha: &[f64],
    beta: &[f64],
    window: f64,
    thresholds: &BellmanThresholds,
) -> Result<BellmanReport> {
    let n = times.len();
    if n < 2 || v.len() != n || alpha.len() != n || beta.len() != n {
        return Err(Error::InvalidArgument("series must be aligned and have at least two samples".into()));
    }
    let dt = times[1] - times[0];
    if !(dt > 0.0) || times.windows(2).any(|w| ((w[1] - w[0]) - dt).abs() > 1e-9 * dt.max(1.0)) {
        return Err(Error::InvalidArgument("time series must be uniform and increasing".into()));
    }
    let span = times[n - 1] - times[0];
    if !(window > 0.0) || window > span + 1e-12 * span {
        return Err(Error::InvalidArgument(format!(
            "window {window} must be positive and at most the series span {span}"
        )));
    }
    if !(0.0..=1.0).contains(&thresholds.tail_fraction) || thresholds.tail_fraction == 0.0 {
        return Err(Error::InvalidArgument("tail_fraction must lie in (0, 1]".into()));
    }
    let prefix = |f: &dyn Fn(usize) -> f64| {
        let mut p = vec![0.0; n];
        for i in 1..n {
            p[i] = p[i - 1] + 0.5 * dt * (f(i - 1) + f(i));
        }
        p
    };
    let pb = prefix(&|i| beta[i].max(0.0));
    let pa = prefix(&|i| alpha[i]);
    let pm = prefix(&|i| (-alpha[i]).max(0.0));
    let m = ((window / dt).round() as usize).clamp(1, n - 1);
    let t_len = m as f64 * dt;
    let windows: Vec<BellmanWindow> = (0..n - m)
        .map(|i| BellmanWindow {
            t: times[i],
            beta_plus: (pb[i + m] - pb[i]) / t_len,
            alpha: (pa[i + m] - pa[i]) / t_len,
            alpha_minus: (pm[i + m] - pm[i]) / t_len,
        })
        .collect();
    let first_tail = ((1.0 - thresholds.tail_fraction) * windows.len() as f64).floor() as usize;
    let tail = &windows[first_tail.min(windows.len() - 1)..];
    let tail_beta_plus = tail.iter().map(|w| w.beta_plus).fold(f64::NEG_INFINITY, f64::max);
    let tail_alpha = tail.iter().map(|w| w.alpha).fold(f64::INFINITY, f64::min);
    let tail_alpha_minus = tail.iter().map(|w| w.alpha_minus).fold(f64::NEG_INFINITY, f64::max);
    Ok(BellmanReport {
        window: t_len,
        beta_condition: tail_beta_plus <= thresholds.beta_tol,
        alpha_condition: tail_alpha > thresholds.alpha_min,
        alpha_minus_condition: tail_alpha_minus <= thresholds.alpha_minus_max,
        tail_beta_plus,
        tail_alpha,
        tail_alpha_minus,
        windows,
        v_ratio: if v[0] > 0.0 { v[n - 1] / v[0] } else { 0.0 },
    })
}

/// `α = −d log V / dt` by central differences (one-sided at the ends); with
/// `β = 0` this makes `V̇ + αV ≤ β` hold with equality up to discretisation.
pub fn log_decay_rate(times: &[f64], v: &[f64]) -> Vec<f64> {
    let n = times.len();
    if n < 2 {
        return vec![0.0; n];
    }
    let lv: Vec<f64> = v.iter().map(|x| x.max(f64::MIN_POSITIVE).ln()).collect();
    (0..n)
        .map(|i| {
            let (a, b) = (i.saturating_sub(1), (i + 1).min(n - 1));
            -(lv[b] - lv[a]) / (times[b] - times[a])
        })
        .collect()
}
