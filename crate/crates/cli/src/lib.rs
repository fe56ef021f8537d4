//! Command-line front end for the nseobs experiments.

pub mod commands;
pub mod config;
pub mod manifest;
pub mod plot;

use std::fmt;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use crate::config::{ExperimentConfig, Preset};
use crate::manifest::{sha256_hex, OutputDir, RunManifest};

pub const THREADS_ENV: &str = "NSEOBS_THREADS";

#[derive(Debug, Parser)]
#[command(name = "nseobs", version, about = "Navier-Stokes observer experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, clap::Args)]
pub struct CommonArgs {
    /// TOML configuration overriding the preset.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
    /// Seed for all randomness (overrides the configuration).
    #[arg(long)]
    pub seed: Option<u64>,
    /// Base preset (overrides a `preset` key in the configuration).
    #[arg(long, value_enum)]
    pub preset: Option<Preset>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Forward simulation: trajectory norms and state snapshots.
    Simulate(CommonArgs),
    /// Divergence of perturbed trajectories for each configured viscosity.
    Sensitivity(CommonArgs),
    /// Observer twin run with the configured operator(s).
    Observe(CommonArgs),
    /// Gain design quantities for the configured operator(s).
    GainReport(CommonArgs),
    /// Θ(Γ_max) against the Brezis-based bound over a viscosity sweep.
    CompareBounds(CommonArgs),
    /// Randomized audit of the L∞ and interpolation inequalities.
    InequalityAudit(CommonArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Simulate(_) => "simulate",
            Command::Sensitivity(_) => "sensitivity",
            Command::Observe(_) => "observe",
            Command::GainReport(_) => "gain-report",
            Command::CompareBounds(_) => "compare-bounds",
            Command::InequalityAudit(_) => "inequality-audit",
        }
    }

    pub fn args(&self) -> &CommonArgs {
        match self {
            Command::Simulate(a)
            | Command::Sensitivity(a)
            | Command::Observe(a)
            | Command::GainReport(a)
            | Command::CompareBounds(a)
            | Command::InequalityAudit(a) => a,
        }
    }
}

/// Invalid configuration; reported with exit code 2.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

pub fn exit_code(err: &anyhow::Error) -> i32 {
    if err.downcast_ref::<ConfigError>().is_some() {
        2
    } else {
        1
    }
}

/// Sizes the global worker pool from `NSEOBS_THREADS` (once per process).
pub fn init_threads() -> Result<()> {
    let Ok(v) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .map_err(|_| ConfigError(format!("{THREADS_ENV}: expected a positive integer, got {v:?}")))?;
    if n == 0 {
        return Err(ConfigError(format!("{THREADS_ENV}: must be at least 1")).into());
    }
    // A pool built earlier in the same process is kept.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

pub fn load_config(args: &CommonArgs) -> Result<(ExperimentConfig, Option<String>)> {
    let text = match &args.config {
        Some(p) => Some(
            std::fs::read_to_string(p)
                .map_err(|e| ConfigError(format!("reading {}: {e}", p.display())))?,
        ),
        None => None,
    };
    let cfg = ExperimentConfig::from_toml(text.as_deref().unwrap_or(""), args.preset, args.seed)
        .map_err(|e| ConfigError(format!("{e:#}")))?;
    Ok((cfg, text))
}

/// Runs one command; the manifest is written to the output directory
/// whether or not the command succeeds.
pub fn run(cli: &Cli) -> Result<PathBuf> {
    let args = cli.command.args();
    let mut manifest = RunManifest::begin(cli.command.name());
    let result = prepare_and_run(cli, args, &mut manifest);
    let (outputs, error) = match &result {
        Ok(out) => (out.entries().to_vec(), None),
        Err((out, e)) => (out.as_ref().map(|o| o.entries().to_vec()).unwrap_or_default(), Some(format!("{e:#}"))),
    };
    let path = manifest.finish(&args.out, &outputs, error)?;
    match result {
        Ok(_) => Ok(path),
        Err((_, e)) => Err(e),
    }
}

type Partial = (Option<OutputDir>, anyhow::Error);

fn prepare_and_run(cli: &Cli, args: &CommonArgs, m: &mut RunManifest) -> std::result::Result<OutputDir, Partial> {
    let (cfg, raw) = match init_threads().and_then(|_| load_config(args)) {
        Ok(c) => c,
        Err(e) => {
            m.seed = args.seed;
            m.preset = args.preset.map(|p| p.name().to_string());
            return Err((None, e));
        }
    };
    let canonical = cfg.to_canonical_toml();
    m.config_digest = sha256_hex(canonical.as_bytes());
    m.seed = Some(cfg.seed);
    m.preset = args.preset.map(|p| p.name().to_string());
    let mut out = OutputDir::create(&args.out).map_err(|e| (None, e))?;
    let mut run = || -> Result<()> {
        out.write("config.toml", canonical.as_bytes())?;
        if let Some(r) = &raw {
            m.metric("source_config_digest", sha256_hex(r.as_bytes()));
        }
        dispatch(&cli.command, &cfg, &mut out, m)
            .with_context(|| format!("{} failed", cli.command.name()))
    };
    match run() {
        Ok(()) => Ok(out),
        Err(e) => Err((Some(out), e)),
    }
}

fn dispatch(cmd: &Command, cfg: &ExperimentConfig, out: &mut OutputDir, m: &mut RunManifest) -> Result<()> {
    match cmd {
        Command::Simulate(_) => commands::simulate(cfg, out, m),
        Command::Sensitivity(_) => commands::sensitivity(cfg, out, m),
        Command::Observe(_) => commands::observe(cfg, out, m),
        Command::GainReport(_) => commands::gain_report(cfg, out, m),
        Command::CompareBounds(_) => commands::compare_bounds_cmd(cfg, out, m),
        Command::InequalityAudit(_) => commands::inequality_audit(cfg, out, m),
    }
}

/// Parses `argv` and runs; returns the process exit code.
pub fn main_with_args<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run(&cli) {
        Ok(path) => {
            println!("{}", path.display());
            0
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            exit_code(&e)
        }
    }
}

/// Output directory helper for callers that only need the manifest path.
pub fn manifest_path(out: &Path) -> PathBuf {
    out.join(manifest::MANIFEST_NAME)
}
