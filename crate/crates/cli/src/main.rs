use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use dichotomy_cli::commands::{cmd_ensemble, cmd_observe, cmd_spectrum, cmd_verify};
use dichotomy_cli::config::{CommandKind, RawConfig};
use dichotomy_cli::{exit_code, CliError};

/// Dichotomy-spectrum detectability analysis and subspace-observer
/// experiments.
#[derive(Parser)]
#[command(name = "dichotomy", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate Lyapunov exponents and Bohl spectral intervals.
    Spectrum(Flags),
    /// Run one seeded observer experiment and log error/eigenvalue tracks.
    Observe(Flags),
    /// Run N seeded observer experiments and aggregate statistics.
    Ensemble(Flags),
    /// Run the invariant verification suite (exit 3 on failure).
    Verify(Flags),
}

#[derive(Args, Debug, Default)]
struct Flags {
    /// Key-value config file (`key = value`); flags override file entries.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Model tag: lorenz96, double_integrator, scalar_counterexample,
    /// diag_lti, sin_ltv.
    #[arg(long)]
    model: Option<String>,
    /// State dimension (lorenz96 only).
    #[arg(long)]
    n: Option<usize>,
    /// Forcing parameter F (lorenz96 only).
    #[arg(long)]
    forcing: Option<f64>,
    /// Number of measured states (lorenz96 only).
    #[arg(long)]
    p: Option<usize>,
    /// Subspace dimension.
    #[arg(long)]
    k: Option<usize>,
    /// Integration step size.
    #[arg(long = "h")]
    h: Option<f64>,
    /// Start time.
    #[arg(long)]
    t0: Option<f64>,
    /// Final time.
    #[arg(long)]
    tf: Option<f64>,
    /// Transient discarded before averaging.
    #[arg(long = "burn-in")]
    burn_in: Option<f64>,
    /// Comma-separated Bohl window lengths, e.g. `300,800`.
    #[arg(long, value_delimiter = ',')]
    windows: Option<Vec<f64>>,
    /// Base RNG seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Number of ensemble/verification runs.
    #[arg(long)]
    runs: Option<usize>,
    /// Initial-perturbation half-width.
    #[arg(long)]
    delta: Option<f64>,
    /// Riccati forcing scale g (G1 = g I).
    #[arg(long = "g1-scale")]
    g1_scale: Option<f64>,
    /// Riccati initialization scale (P1(0) = scale * I).
    #[arg(long = "p1-scale")]
    p1_scale: Option<f64>,
    /// Non-negativity margin for the j* count.
    #[arg(long)]
    margin: Option<f64>,
    /// Worker threads for ensembles (0 = auto).
    #[arg(long)]
    workers: Option<usize>,
    /// Error norm below which a run counts as converged.
    #[arg(long = "conv-threshold")]
    conv_threshold: Option<f64>,
    /// Riccati definiteness-check cadence in steps (0 disables).
    #[arg(long = "definiteness-every")]
    definiteness_every: Option<usize>,
    /// Slope of the emitted reference decay line (ensemble only).
    #[arg(long = "ref-rate", allow_hyphen_values = true)]
    ref_rate: Option<f64>,
    /// Decay-fit window start (default t0 + 0.2 (tf - t0)).
    #[arg(long = "fit-start")]
    fit_start: Option<f64>,
    /// Decay-fit window end (default t0 + 0.8 (tf - t0)).
    #[arg(long = "fit-end")]
    fit_end: Option<f64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Flags {
    fn into_raw(self) -> Result<(Option<PathBuf>, RawConfig), CliError> {
        let raw = RawConfig {
            model: self.model,
            n: self.n,
            forcing: self.forcing,
            p: self.p,
            k: self.k,
            h: self.h,
            t0: self.t0,
            tf: self.tf,
            burn_in: self.burn_in,
            windows: self.windows,
            seed: self.seed,
            runs: self.runs,
            delta: self.delta,
            g1_scale: self.g1_scale,
            p1_scale: self.p1_scale,
            margin: self.margin,
            workers: self.workers,
            conv_threshold: self.conv_threshold,
            definiteness_every: self.definiteness_every,
            ref_rate: self.ref_rate,
            fit_start: self.fit_start,
            fit_end: self.fit_end,
            out: self.out,
        };
        Ok((self.config, raw))
    }
}

fn dispatch(command: Command) -> Result<(), CliError> {
    let (kind, flags) = match command {
        Command::Spectrum(f) => (CommandKind::Spectrum, f),
        Command::Observe(f) => (CommandKind::Observe, f),
        Command::Ensemble(f) => (CommandKind::Ensemble, f),
        Command::Verify(f) => (CommandKind::Verify, f),
    };
    let (config_path, flag_overrides) = flags.into_raw()?;
    let base = match config_path {
        Some(path) => RawConfig::from_file(&path)?,
        None => RawConfig::default(),
    };
    let cfg = base.overlay(flag_overrides).resolve(kind)?;
    match kind {
        CommandKind::Spectrum => cmd_spectrum(&cfg),
        CommandKind::Observe => cmd_observe(&cfg),
        CommandKind::Ensemble => cmd_ensemble(&cfg),
        CommandKind::Verify => cmd_verify(&cfg),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = dispatch(cli.command);
    if let Err(e) = &result {
        eprintln!("error: {e}");
    }
    ExitCode::from(exit_code(&result) as u8)
}
