//! Experiment configuration: named presets overridden by a TOML document.

use std::f64::consts::PI;
use std::path::PathBuf;

use anyhow::{anyhow, bail, Context, Result};
use serde::{Deserialize, Serialize};

use nseobs_core::gain::DesignInputs;
use nseobs_core::observation::PERIODIC_CELL_C_OMEGA;
use nseobs_core::observer::ErrorNorm;
use nseobs_core::solver::{ForcingKind, ForcingSpec, PerturbationSpec, SolverConfig};
use nseobs_core::GridSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    /// Reduced resolution for interactive runs and the acceptance suite.
    Desk,
    /// Full experiment resolution (long running).
    Paper,
}

impl Preset {
    pub fn name(self) -> &'static str {
        match self {
            Preset::Desk => "desk",
            Preset::Paper => "paper",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub ell1: f64,
    pub ell2: f64,
    pub n1: usize,
    pub n2: usize,
    pub dealias_fraction: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialKind {
    Peaks,
    TaylorGreen,
    Snapshot,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    pub nu: f64,
    pub dt: f64,
    pub t_end: f64,
    pub picard_tol: f64,
    pub picard_max_iters: usize,
    pub record_every: usize,
    /// Steps between state snapshots; 0 writes only the final state.
    pub snapshot_every: usize,
    pub initial: InitialKind,
    /// NSEF1 file for `initial = "snapshot"`.
    pub initial_path: String,
    pub initial_amplitude: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ForcingKindName {
    Kolmogorov,
    Zero,
    Snapshot,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForcingSection {
    pub kind: ForcingKindName,
    pub mode: usize,
    pub target_l2: f64,
    /// NSEF1 file for `kind = "snapshot"`.
    pub path: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OperatorChoice {
    Average,
    Point,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GainKeyword {
    #[serde(rename = "auto")]
    Auto,
}

/// Either a fixed gain or `"auto"` (computed by the design pipeline).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GainSetting {
    Value(f64),
    Keyword(GainKeyword),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ObserverStart {
    Zero,
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormName {
    L2,
    H1,
}

impl From<NormName> for ErrorNorm {
    fn from(n: NormName) -> Self {
        match n {
            NormName::L2 => ErrorNorm::L2,
            NormName::H1 => ErrorNorm::H1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObserverSection {
    pub operator: OperatorChoice,
    pub nx: usize,
    pub ny: usize,
    pub gain: GainSetting,
    /// When false the observer's input differs from the truth forcing by a
    /// decaying perturbation bounded by `mismatch_amplitude·e^{−mismatch_rate·t}`.
    pub known_input: bool,
    pub mismatch_amplitude: f64,
    pub mismatch_rate: f64,
    pub error_norm: NormName,
    pub z0: ObserverStart,
    /// `‖z₀‖_{H¹} / ‖u₀‖_{H¹}` for `z0 = "random"`.
    pub z0_scale: f64,
    /// Random fields used to calibrate the point-operator constant.
    pub calibration_samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GainSection {
    pub kappa: f64,
    pub beta: f64,
    pub theta_factor: f64,
    /// Certificate constant; 0 uses the operator's own constant.
    pub c_omega: f64,
    /// Mesh size; 0 uses the configured partition.
    pub h: f64,
    /// `‖f‖_{L²}`; 0 uses the realised forcing.
    pub f_l2: f64,
    /// `‖∇u₀‖_{L²}`; negative uses the realised initial condition.
    pub grad_u0_l2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub nu_min: f64,
    pub nu_max: f64,
    pub points: usize,
    pub sensitivity_nus: Vec<f64>,
    pub ic_amplitude: f64,
    pub input_amplitude: f64,
    pub input_rate: f64,
    pub perturbation_band: usize,
    /// Resolution of the grid the inequality audit samples fields on.
    pub inequality_n: usize,
    pub inequality_count: usize,
    pub inequality_band: usize,
    pub inequality_decays: Vec<f64>,
    pub gamma_min: f64,
    pub gamma_max: f64,
    pub gamma_points: usize,
    pub inequality_nx: usize,
    pub appendix_gammas: usize,
}

/// Fully resolved experiment configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub grid: GridSection,
    pub solver: SolverSection,
    pub forcing: ForcingSection,
    pub observer: ObserverSection,
    pub gain: GainSection,
    pub sweep: SweepSection,
}

impl ExperimentConfig {
    pub fn preset(p: Preset) -> Self {
        // The full-resolution preset designs the gain with the periodic-cell
        // constant to reproduce the reference operating point.
        let (n, nx, c_omega) = match p {
            Preset::Desk => (128, 64, 0.0),
            Preset::Paper => (200, 150, PERIODIC_CELL_C_OMEGA),
        };
        Self {
            seed: 1,
            grid: GridSection {
                ell1: 2.0 * PI,
                ell2: 2.0 * PI,
                n1: n,
                n2: n,
                dealias_fraction: GridSpec::TWO_THIRDS,
            },
            solver: SolverSection {
                nu: 0.01,
                dt: 0.0025,
                t_end: 10.0,
                picard_tol: SolverConfig::DEFAULT_PICARD_TOL,
                picard_max_iters: SolverConfig::DEFAULT_PICARD_MAX_ITERS,
                record_every: 4,
                snapshot_every: 0,
                initial: InitialKind::Peaks,
                initial_path: String::new(),
                initial_amplitude: 1.0,
            },
            forcing: ForcingSection {
                kind: ForcingKindName::Kolmogorov,
                mode: 6,
                target_l2: 0.1,
                path: String::new(),
            },
            observer: ObserverSection {
                operator: OperatorChoice::Average,
                nx,
                ny: nx,
                gain: GainSetting::Keyword(GainKeyword::Auto),
                known_input: true,
                mismatch_amplitude: 1e-3,
                mismatch_rate: 2.0,
                error_norm: NormName::H1,
                z0: ObserverStart::Zero,
                z0_scale: 1.0,
                calibration_samples: 100,
            },
            gain: GainSection {
                kappa: 1.1,
                beta: 0.96,
                theta_factor: 1.1,
                c_omega,
                h: 0.0,
                f_l2: 0.0,
                grad_u0_l2: -1.0,
            },
            sweep: SweepSection {
                nu_min: 1e-6,
                nu_max: 1e-1,
                points: 25,
                sensitivity_nus: vec![0.01, 0.1],
                ic_amplitude: 1e-5,
                input_amplitude: 1e-3,
                input_rate: 2.0,
                perturbation_band: 4,
                inequality_n: 64,
                inequality_count: 1000,
                inequality_band: 20,
                inequality_decays: vec![1.5, 0.0],
                gamma_min: 1e-2,
                gamma_max: 1e4,
                gamma_points: 20,
                inequality_nx: 16,
                appendix_gammas: 10,
            },
        }
    }

    /// Preset defaults overridden by the keys of `text`; a `preset` key in
    /// the document is honoured unless `preset` is given explicitly.
    pub fn from_toml(text: &str, preset: Option<Preset>, seed: Option<u64>) -> Result<Self> {
        let mut user: toml::Table = text.parse().context("config is not valid TOML")?;
        let named = match user.remove("preset") {
            Some(toml::Value::String(s)) => Some(match s.as_str() {
                "desk" => Preset::Desk,
                "paper" => Preset::Paper,
                other => bail!("preset: unknown value {other:?} (expected desk or paper)"),
            }),
            Some(_) => bail!("preset: expected a string"),
            None => None,
        };
        let base = Self::preset(preset.or(named).unwrap_or(Preset::Desk));
        let mut table = toml::Table::try_from(&base).context("serialising preset")?;
        merge(&mut table, user, "")?;
        let mut cfg: Self = table
            .try_into()
            .map_err(|e: toml::de::Error| anyhow!("config: {}", e.message()))?;
        if let Some(s) = seed {
            cfg.seed = s;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("grid.ell1", self.grid.ell1),
            ("grid.ell2", self.grid.ell2),
            ("solver.nu", self.solver.nu),
            ("solver.dt", self.solver.dt),
            ("solver.picard_tol", self.solver.picard_tol),
            ("gain.kappa", self.gain.kappa),
            ("gain.beta", self.gain.beta),
            ("gain.theta_factor", self.gain.theta_factor),
            ("sweep.nu_min", self.sweep.nu_min),
            ("sweep.nu_max", self.sweep.nu_max),
            ("sweep.gamma_min", self.sweep.gamma_min),
            ("sweep.gamma_max", self.sweep.gamma_max),
            ("observer.mismatch_rate", self.observer.mismatch_rate),
        ];
        for (k, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                bail!("{k}: must be positive, got {v}");
            }
        }
        let non_negative = [
            ("solver.t_end", self.solver.t_end),
            ("forcing.target_l2", self.forcing.target_l2),
            ("observer.mismatch_amplitude", self.observer.mismatch_amplitude),
            ("observer.z0_scale", self.observer.z0_scale),
            ("gain.c_omega", self.gain.c_omega),
            ("gain.h", self.gain.h),
            ("gain.f_l2", self.gain.f_l2),
            ("sweep.ic_amplitude", self.sweep.ic_amplitude),
            ("sweep.input_amplitude", self.sweep.input_amplitude),
            ("sweep.input_rate", self.sweep.input_rate),
        ];
        for (k, v) in non_negative {
            if !(v >= 0.0 && v.is_finite()) {
                bail!("{k}: must be non-negative, got {v}");
            }
        }
        if let GainSetting::Value(l) = self.observer.gain {
            if !(l > 0.0 && l.is_finite()) {
                bail!("observer.gain: must be positive or \"auto\", got {l}");
            }
        }
        if self.observer.nx == 0 || self.observer.ny == 0 {
            bail!("observer.nx/ny: must be positive");
        }
        if self.sweep.points == 0 || self.sweep.gamma_points == 0 {
            bail!("sweep.points/gamma_points: must be positive");
        }
        if self.sweep.sensitivity_nus.iter().any(|v| !(*v > 0.0)) {
            bail!("sweep.sensitivity_nus: values must be positive");
        }
        self.grid_spec()?;
        self.inequality_grid()?;
        self.solver_config()?;
        Ok(())
    }

    pub fn grid_spec(&self) -> Result<GridSpec> {
        let g = &self.grid;
        GridSpec::with_dealias(g.ell1, g.ell2, g.n1, g.n2, g.dealias_fraction).context("grid")
    }

    /// Audit grid: the configured domain at `sweep.inequality_n` points.
    pub fn inequality_grid(&self) -> Result<GridSpec> {
        let g = &self.grid;
        let n = self.sweep.inequality_n;
        GridSpec::with_dealias(g.ell1, g.ell2, n, n, g.dealias_fraction).context("sweep.inequality_n")
    }

    pub fn solver_config(&self) -> Result<SolverConfig> {
        self.solver_config_with_nu(self.solver.nu)
    }

    pub fn solver_config_with_nu(&self, nu: f64) -> Result<SolverConfig> {
        let s = &self.solver;
        let cfg = SolverConfig {
            nu,
            dt: s.dt,
            t_end: s.t_end,
            picard_tol: s.picard_tol,
            picard_max_iters: s.picard_max_iters,
            record_every: s.record_every,
            advection: true,
        };
        cfg.validate().context("solver")?;
        Ok(cfg)
    }

    pub fn forcing_spec(&self) -> ForcingSpec {
        let f = &self.forcing;
        match f.kind {
            ForcingKindName::Kolmogorov => ForcingSpec::kolmogorov(f.mode, f.target_l2),
            ForcingKindName::Zero => ForcingSpec::zero(),
            ForcingKindName::Snapshot => ForcingSpec {
                kind: ForcingKind::Snapshot(PathBuf::from(&f.path)),
                mode: f.mode,
                target_l2: f.target_l2,
                perturbation: None,
            },
        }
    }

    /// Perturbation of the observer's input model (unknown-input runs).
    pub fn input_mismatch(&self) -> PerturbationSpec {
        let mut p = PerturbationSpec::new(
            self.observer.mismatch_amplitude,
            self.observer.mismatch_rate,
            self.seed.wrapping_add(1),
        );
        p.band = self.sweep.perturbation_band;
        p
    }

    /// Design inputs with the operator-dependent entries filled in by the caller.
    pub fn design_inputs(&self, f_l2: f64, c_omega: f64, h: f64, grad_u0_l2: f64) -> DesignInputs {
        let g = &self.gain;
        let pick = |v: f64, fallback: f64| if v > 0.0 { v } else { fallback };
        DesignInputs {
            nu: self.solver.nu,
            ell1: self.grid.ell1,
            ell2: self.grid.ell2,
            f_l2: pick(g.f_l2, f_l2),
            kappa: g.kappa,
            c_omega: pick(g.c_omega, c_omega),
            h: pick(g.h, h),
            beta: g.beta,
            theta_factor: g.theta_factor,
            grad_u0_l2: if g.grad_u0_l2 >= 0.0 { g.grad_u0_l2 } else { grad_u0_l2 },
        }
    }

    /// Canonical TOML rendering (used for the manifest digest).
    pub fn to_canonical_toml(&self) -> String {
        toml::to_string(self).expect("configuration serialises")
    }
}

fn merge(base: &mut toml::Table, user: toml::Table, prefix: &str) -> Result<()> {
    for (k, v) in user {
        let path = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
        match (base.get_mut(&k), v) {
            (None, _) => bail!("{path}: unknown key"),
            (Some(toml::Value::Table(b)), toml::Value::Table(u)) => merge(b, u, &path)?,
            (Some(toml::Value::Table(_)), _) => bail!("{path}: expected a table"),
            (Some(_), toml::Value::Table(_)) => bail!("{path}: expected a value, found a table"),
            (Some(slot), v) => {
                *slot = match (&*slot, v) {
                    // Integers are accepted where reals are expected.
                    (toml::Value::Float(_), toml::Value::Integer(i)) => toml::Value::Float(i as f64),
                    (_, v) => v,
                }
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_is_the_preset() {
        let c = ExperimentConfig::from_toml("", None, None).unwrap();
        assert_eq!(c, ExperimentConfig::preset(Preset::Desk));
        let p = ExperimentConfig::from_toml("preset = \"paper\"", None, None).unwrap();
        assert_eq!(p.grid.n1, 200);
        assert_eq!(p.solver_config().unwrap().steps().unwrap(), 4000);
        let q = ExperimentConfig::from_toml("preset = \"paper\"", Some(Preset::Desk), Some(9)).unwrap();
        assert_eq!(q.grid.n1, 128);
        assert_eq!(q.seed, 9);
    }

    #[test]
    fn overrides_and_integer_promotion() {
        let c = ExperimentConfig::from_toml(
            "[solver]\nnu = 0.02\nt_end = 1\n[observer]\ngain = 12.5\noperator = \"point\"\n",
            None,
            None,
        )
        .unwrap();
        assert_eq!(c.solver.nu, 0.02);
        assert_eq!(c.solver.t_end, 1.0);
        assert_eq!(c.observer.gain, GainSetting::Value(12.5));
        assert_eq!(c.observer.operator, OperatorChoice::Point);
        let auto = ExperimentConfig::from_toml("[observer]\ngain = \"auto\"", None, None).unwrap();
        assert_eq!(auto.observer.gain, GainSetting::Keyword(GainKeyword::Auto));
    }

    #[test]
    fn unknown_keys_are_named() {
        let e = ExperimentConfig::from_toml("[solver]\nnuu = 0.1", None, None).unwrap_err();
        assert!(e.to_string().contains("solver.nuu"), "{e}");
        let e = ExperimentConfig::from_toml("[solvr]\nnu = 0.1", None, None).unwrap_err();
        assert!(e.to_string().contains("solvr"), "{e}");
        let e = ExperimentConfig::from_toml("[solver]\nnu = -1.0", None, None).unwrap_err();
        assert!(e.to_string().contains("solver.nu"), "{e}");
        let e = ExperimentConfig::from_toml("[solver]\nt_end = 0.001", None, None).unwrap_err();
        assert!(format!("{e:#}").contains("multiple"), "{e:#}");
        assert!(ExperimentConfig::from_toml("[observer]\ngain = \"manual\"", None, None).is_err());
    }

    #[test]
    fn canonical_rendering_round_trips() {
        let c = ExperimentConfig::preset(Preset::Paper);
        let back: ExperimentConfig = toml::from_str(&c.to_canonical_toml()).unwrap();
        assert_eq!(back, c);
    }
}
