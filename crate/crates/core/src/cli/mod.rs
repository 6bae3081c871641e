//! Command-line front end: argument parsing, dispatch, and report emission.
//!
//! Every command reads one JSON input, writes `report.json` (and possibly CSV
//! dumps) into the output directory, and maps failures onto exit statuses:
//! `2` for invalid input or configuration, `3` for numerical failures, `4`
//! when a statistical check is inconsistent, `1` for I/O errors.

mod commands;
pub mod output;

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::error::Error;

/// Version of the report envelope; bumped on incompatible changes.
pub const SCHEMA_VERSION: u32 = 1;

/// Environment variable holding the default worker-thread count.
pub const THREADS_ENV: &str = "SYSTOLE_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Boundary data, special orbits and rational tori of a toric profile.
    ToricAnalyze,
    /// Systolic interval, norm and witnesses of a toric profile.
    Systole,
    /// Monte Carlo check of the action–linking identity for the special disks.
    VerifyActionLinking,
    /// Orbit-set approximation of the Liouville measure and witness measures.
    Equidistribute,
    /// Calabi invariant, periodic points and mean actions of a disk map.
    DiskmapCalabi,
    /// Suspension dictionary between periodic points and Reeb orbits.
    DiskmapDictionary,
    /// Linking number of two closed curves in S³.
    Linking,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::ToricAnalyze => "toric-analyze",
            Command::Systole => "systole",
            Command::VerifyActionLinking => "verify-action-linking",
            Command::Equidistribute => "equidistribute",
            Command::DiskmapCalabi => "diskmap-calabi",
            Command::DiskmapDictionary => "diskmap-dictionary",
            Command::Linking => "linking",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SurfaceChoice {
    Gamma1,
    Gamma2,
    Both,
}

#[derive(Debug, Clone, Parser)]
#[command(name = "systole", version, about = "Systolic invariants of toric contact forms and disk-map suspensions")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// JSON input (profile, Hamiltonian, or curve pair).
    #[arg(long, global = true)]
    pub input: Option<PathBuf>,
    /// Directory receiving report.json and CSV dumps.
    #[arg(long, global = true, default_value = ".")]
    pub output: PathBuf,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Monte Carlo sample count (verify-action-linking, equidistribute).
    #[arg(long, global = true)]
    pub samples: Option<usize>,
    /// Trajectory horizon for asymptotic intersection rates.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub horizon: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub epsilon: Option<f64>,
    /// Grid / quadrature resolution (meaning depends on the command).
    #[arg(long, global = true)]
    pub grid: Option<usize>,
    /// Largest max(p, q) of rational tori considered.
    #[arg(long, global = true)]
    pub max_pq: Option<u32>,
    /// Largest period of disk-map periodic points.
    #[arg(long, global = true)]
    pub k_max: Option<u32>,
    /// Suspension constant c (default: max(0, −min H) + 1).
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub constant: Option<f64>,
    /// Seifert surfaces for verify-action-linking.
    #[arg(long, global = true, value_enum, default_value_t = SurfaceChoice::Both)]
    pub surface: SurfaceChoice,
    /// Suppress the summary and warnings on stderr.
    #[arg(long, global = true)]
    pub quiet: bool,
}

/// A fully resolved invocation.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: Command,
    pub input: PathBuf,
    pub output: PathBuf,
    pub seed: u64,
    pub samples: Option<usize>,
    pub horizon: Option<f64>,
    pub epsilon: Option<f64>,
    pub grid: Option<usize>,
    pub max_pq: Option<u32>,
    pub k_max: Option<u32>,
    pub constant: Option<f64>,
    pub surface: SurfaceChoice,
    pub threads: usize,
    pub quiet: bool,
}

impl RunConfig {
    pub fn from_cli(cli: Cli) -> Result<Self, CliError> {
        let input =
            cli.input.ok_or_else(|| CliError::Input(format!("{} requires --input PATH", cli.command.name())))?;
        Ok(RunConfig {
            command: cli.command,
            input,
            output: cli.output,
            seed: cli.seed,
            samples: cli.samples,
            horizon: cli.horizon,
            epsilon: cli.epsilon,
            grid: cli.grid,
            max_pq: cli.max_pq,
            k_max: cli.k_max,
            constant: cli.constant,
            surface: cli.surface,
            threads: threads_from_env()?,
            quiet: cli.quiet,
        })
    }

    /// Defaults for everything but the command and paths.
    pub fn new(command: Command, input: impl Into<PathBuf>, output: impl Into<PathBuf>) -> Self {
        RunConfig {
            command,
            input: input.into(),
            output: output.into(),
            seed: 0,
            samples: None,
            horizon: None,
            epsilon: None,
            grid: None,
            max_pq: None,
            k_max: None,
            constant: None,
            surface: SurfaceChoice::Both,
            threads: 1,
            quiet: true,
        }
    }
}

fn threads_from_env() -> Result<usize, CliError> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&n| n >= 1)
            .ok_or_else(|| CliError::Input(format!("{THREADS_ENV}={v:?} is not a positive integer"))),
        Err(_) => Ok(crate::numerics::parallel::default_threads()),
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Malformed or inconsistent input.
    #[error("{0}")]
    Input(String),
    #[error(transparent)]
    Compute(#[from] Error),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io { path: path.to_path_buf(), source }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Io { .. } => 1,
            CliError::Compute(e) => match e {
                Error::Domain(_) | Error::Validation(_) | Error::Config(_) | Error::Precondition(_) => 2,
                Error::Numerical { .. } | Error::Resolution { .. } | Error::Coverage { .. } => 3,
            },
        }
    }
}

/// Result of a successful run.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    /// `0`, or `4` when a statistical check failed.
    pub exit_code: i32,
    pub files: Vec<PathBuf>,
    pub summary: String,
    pub warnings: Vec<String>,
}

/// Executes one command and writes its report files.
pub fn run(config: &RunConfig) -> Result<RunOutcome, CliError> {
    commands::dispatch(config)
}

/// Entry point shared by the binary: parses arguments, runs, prints
/// diagnostics, and returns the process exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let outcome = RunConfig::from_cli(cli).and_then(|cfg| run(&cfg).map(|o| (cfg.quiet, o)));
    match outcome {
        Ok((quiet, o)) => {
            if !quiet {
                for w in &o.warnings {
                    eprintln!("warning: {w}");
                }
                eprintln!("{}", o.summary);
            }
            o.exit_code
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_code_contract() {
        let code = |e: Error| CliError::Compute(e).exit_code();
        assert_eq!(code(Error::Validation("x".into())), 2);
        assert_eq!(code(Error::Precondition("x".into())), 2);
        assert_eq!(code(Error::Config("x".into())), 2);
        assert_eq!(code(Error::Domain("x".into())), 2);
        assert_eq!(code(Error::Numerical { what: "x".into(), residual: 1.0 }), 3);
        assert_eq!(code(Error::Resolution { horizon: 1.0 }), 3);
        assert_eq!(code(Error::Coverage { lo: 0.0, hi: 1.0, max_pq: 3 }), 3);
        assert_eq!(CliError::Input("x".into()).exit_code(), 2);
    }

    #[test]
    fn arguments_parse_after_the_subcommand() {
        let cli =
            Cli::try_parse_from(["systole", "diskmap-dictionary", "--input", "h.json", "--constant", "-0.5"]).unwrap();
        assert_eq!(cli.command, Command::DiskmapDictionary);
        assert_eq!(cli.constant, Some(-0.5));
        assert!(Cli::try_parse_from(["systole", "nonsense"]).is_err());
    }
}
