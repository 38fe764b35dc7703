//! `kaonbell` command-line front end.
//!
//! Every subcommand renders its result to a byte buffer first; the buffer is
//! then written to `--out` (or standard output) and, when requested, a
//! [`RunManifest`] is written next to it.

pub mod commands;
pub mod config;
pub mod format;
pub mod manifest;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use kaonbell::params::PartialParams;
use kaonbell::{HvModel, Objective, ParamError};

use crate::commands::{ChshMode, CurveKind, CurveSpec, ScanRequest, SimulateRequest};
use crate::config::{resolve_params, ParamSources, ResolvedParams};
use crate::manifest::RunManifest;

pub use crate::config::PARAMS_ENV;

pub mod exit {
    pub const OK: u8 = 0;
    pub const ERROR: u8 = 1;
    pub const USAGE: u8 = 2;
    /// `scan` finished but found no CHSH violation in the range.
    pub const NO_VIOLATION: u8 = 3;
    /// `simulate` produced an estimate outside the local-realistic interval.
    pub const BOUND_VIOLATION: u8 = 4;
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Params(#[from] ParamError),
    #[error(transparent)]
    Core(#[from] kaonbell::Error),
    #[error("invalid curve: {0}")]
    InvalidSpec(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot write output: {0}")]
    Stdout(#[source] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("manifest {path}: {message}")]
    Manifest { path: PathBuf, message: String },
    #[error("thread pool: {0}")]
    ThreadPool(#[from] rayon::ThreadPoolBuildError),
}

#[derive(Debug, Parser)]
#[command(
    name = "kaonbell",
    version,
    about = "Bell tests with entangled neutral kaons"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
#[command(next_help_heading = "Global options")]
pub struct GlobalArgs {
    /// Parameter file (`key = value` lines); overridden by $KAONBELL_PARAMS and flags.
    #[arg(long, global = true, value_name = "FILE")]
    pub params: Option<PathBuf>,
    /// K_S width Γ_S in 1/τ_S.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub gamma_s: Option<f64>,
    /// K_L width Γ_L in 1/τ_S.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub gamma_l: Option<f64>,
    /// Mass difference Δm in 1/τ_S.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub delta_m: Option<f64>,
    /// Monte Carlo seed.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Write the result here instead of standard output.
    #[arg(long, global = true, value_name = "FILE")]
    pub out: Option<PathBuf>,
    /// Manifest path; defaults to `<out>.manifest.json` when `--out` is given.
    #[arg(long, global = true, value_name = "FILE")]
    pub manifest: Option<PathBuf>,
    /// Worker threads for Monte Carlo runs (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Sample an asymmetry or CHSH curve as CSV.
    Curve(CurveArgs),
    /// Search τ for the extremal CHSH value.
    Scan(ScanArgs),
    /// Run a local hidden-variable Monte Carlo at one pair of times.
    Simulate(SimulateArgs),
    /// Print the resolved parameters and where each came from.
    Params,
    /// Re-run the command recorded in a manifest and check its checksum.
    Replay { manifest_file: PathBuf },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CurveKindArg {
    Asymmetry,
    Chsh,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ChshModeArg {
    Ren,
    Unren,
    Stable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ObjectiveArg {
    Min,
    Max,
}

impl From<ObjectiveArg> for Objective {
    fn from(o: ObjectiveArg) -> Self {
        match o {
            ObjectiveArg::Min => Objective::Min,
            ObjectiveArg::Max => Objective::Max,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct CurveArgs {
    #[arg(value_enum)]
    pub kind: CurveKindArg,
    /// τ₂/τ₁ for asymmetry curves.
    #[arg(long, default_value_t = 1.5)]
    pub alpha: f64,
    #[arg(long, value_enum, default_value_t = ChshModeArg::Ren)]
    pub mode: ChshModeArg,
    /// Schedule offset for `--mode unren`.
    #[arg(long, default_value_t = 6.0)]
    pub p: f64,
    #[arg(long, default_value_t = 0.0)]
    pub from: f64,
    #[arg(long, default_value_t = 4.0)]
    pub to: f64,
    #[arg(long, default_value_t = 401)]
    pub steps: usize,
}

impl CurveArgs {
    pub fn spec(&self) -> CurveSpec {
        let kind = match self.kind {
            CurveKindArg::Asymmetry => CurveKind::Asymmetry { alpha: self.alpha },
            CurveKindArg::Chsh => CurveKind::Chsh(match self.mode {
                ChshModeArg::Ren => ChshMode::Ren,
                ChshModeArg::Unren => ChshMode::Unren { p: self.p },
                ChshModeArg::Stable => ChshMode::Stable,
            }),
        };
        CurveSpec {
            kind,
            x_lo: self.from,
            x_hi: self.to,
            steps: self.steps,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct ScanArgs {
    #[arg(long, value_enum, default_value_t = ObjectiveArg::Min)]
    pub objective: ObjectiveArg,
    #[arg(long, default_value_t = 0.0)]
    pub from: f64,
    #[arg(long, default_value_t = 4.0)]
    pub to: f64,
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    #[arg(long, default_value_t = kaonbell::optimize::DEFAULT_GRID_POINTS)]
    pub grid: usize,
    /// Use Γ_S = Γ_L = 0 with the resolved Δm.
    #[arg(long)]
    pub stable: bool,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[arg(long, value_parser = parse_model)]
    pub model: HvModel,
    #[arg(long)]
    pub tau1: f64,
    #[arg(long)]
    pub tau2: f64,
    #[arg(long, default_value_t = 1_000_000)]
    pub events: u64,
}

fn parse_model(s: &str) -> Result<HvModel, String> {
    s.parse()
}

/// Result of one subcommand before anything is written.
#[derive(Debug, Clone)]
pub struct Rendered {
    pub bytes: Vec<u8>,
    pub status: u8,
    pub resolved: ResolvedParams,
    /// Human-readable note for standard error.
    pub note: Option<String>,
}

fn json_bytes<T: serde::Serialize>(value: &T) -> Result<Vec<u8>, CliError> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s.into_bytes())
}

/// Computes the output of `cli` (anything except `replay`).
pub fn render(cli: &Cli, env_params: Option<&Path>) -> Result<Rendered, CliError> {
    let g = &cli.global;
    let resolved = resolve_params(&ParamSources {
        file: g.params.as_deref(),
        env: env_params,
        flags: PartialParams {
            gamma_s: g.gamma_s,
            gamma_l: g.gamma_l,
            delta_m: g.delta_m,
        },
    })?;
    let params = resolved.params;
    let (bytes, status, note) = match &cli.command {
        Command::Curve(args) => {
            let csv = commands::cmd_curve(&args.spec(), &params)?;
            (csv.into_bytes(), exit::OK, None)
        }
        Command::Scan(args) => {
            let report = commands::cmd_scan(
                &params,
                &ScanRequest {
                    objective: args.objective.into(),
                    tau_lo: args.from,
                    tau_hi: args.to,
                    tol: args.tol,
                    grid_points: args.grid,
                    stable: args.stable,
                },
            )?;
            let (status, note) = if report.violation {
                (exit::OK, None)
            } else {
                (
                    exit::NO_VIOLATION,
                    Some(format!(
                        "no violation in [{}, {}]: s* = {}",
                        args.from, args.to, report.s_star
                    )),
                )
            };
            (json_bytes(&report)?, status, note)
        }
        Command::Simulate(args) => {
            let report = commands::cmd_simulate(
                &params,
                &SimulateRequest {
                    model: args.model,
                    tau1: args.tau1,
                    tau2: args.tau2,
                    n_events: args.events,
                    seed: g.seed,
                },
            )?;
            let (status, note) = if report.within_bounds {
                (exit::OK, None)
            } else {
                (
                    exit::BOUND_VIOLATION,
                    Some(format!(
                        "estimate {} ± {} outside [{}, {}]",
                        report.estimate.value,
                        report.estimate.sigma,
                        report.bounds.lower,
                        report.bounds.upper
                    )),
                )
            };
            (json_bytes(&report)?, status, note)
        }
        Command::Params => (
            commands::cmd_params(&resolved)?.into_bytes(),
            exit::OK,
            None,
        ),
        Command::Replay { .. } => unreachable!("replay is dispatched by run_with"),
    };
    Ok(Rendered {
        bytes,
        status,
        resolved,
        note,
    })
}

fn in_pool<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, CliError> {
    match threads {
        Some(n) => Ok(rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()?
            .install(f)),
        None => Ok(f()),
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    std::fs::write(path, bytes).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn emit(global: &GlobalArgs, bytes: &[u8], stdout: &mut dyn Write) -> Result<(), CliError> {
    match &global.out {
        Some(path) => write_file(path, bytes),
        None => stdout
            .write_all(bytes)
            .and_then(|_| stdout.flush())
            .map_err(CliError::Stdout),
    }
}

fn manifest_path(global: &GlobalArgs) -> Option<PathBuf> {
    global.manifest.clone().or_else(|| {
        global.out.as_ref().map(|out| {
            let mut s = out.clone().into_os_string();
            s.push(".manifest.json");
            PathBuf::from(s)
        })
    })
}

fn execute(
    cli: &Cli,
    argv: &[String],
    env_params: Option<&Path>,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<u8, CliError> {
    if let Command::Replay { manifest_file } = &cli.command {
        let recorded = RunManifest::read(manifest_file)?;
        let replay_cli = Cli::try_parse_from(&recorded.replay).map_err(|e| CliError::Manifest {
            path: manifest_file.clone(),
            message: format!("recorded command does not parse: {e}"),
        })?;
        let env = recorded.replay_env.as_deref().map(Path::new);
        let rendered = in_pool(cli.global.threads, || render(&replay_cli, env))??;
        recorded.verify(manifest_file, &rendered.bytes)?;
        emit(&cli.global, &rendered.bytes, stdout)?;
        return Ok(rendered.status);
    }

    let rendered = in_pool(cli.global.threads, || render(cli, env_params))??;
    emit(&cli.global, &rendered.bytes, stdout)?;
    if let Some(path) = manifest_path(&cli.global) {
        let m = RunManifest::new(cli, argv, env_params, &rendered);
        write_file(&path, &json_bytes(&m)?)?;
    }
    if let Some(note) = &rendered.note {
        let _ = writeln!(stderr, "kaonbell: {note}");
    }
    Ok(rendered.status)
}

/// Runs the CLI on `args` (including the program name) and returns the
/// process exit status. `env_params` stands in for `$KAONBELL_PARAMS`.
pub fn run_with<I, T>(
    args: I,
    env_params: Option<&Path>,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let argv: Vec<String> = args
        .into_iter()
        .map(|a| a.into().to_string_lossy().into_owned())
        .collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() {
                exit::USAGE
            } else {
                exit::OK
            };
            let rendered = e.render().to_string();
            let sink: &mut dyn Write = if e.use_stderr() { stderr } else { stdout };
            let _ = sink.write_all(rendered.as_bytes());
            return code;
        }
    };
    match execute(&cli, &argv, env_params, stdout, stderr) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "kaonbell: {e}");
            exit::ERROR
        }
    }
}
