//! Command-line front end: `solve`, `sweep`, `fit`, `flsim` and `verify`.
//!
//! Exit codes: 0 success, 1 usage or config error, 2 when best-response
//! dynamics do not reach a verified equilibrium.

mod commands;
pub mod output;
pub mod samples;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::mechanisms::Mechanism;
use crate::solver::{SweepParam, UpdateScheme};

pub use commands::{SolveSummary, SweepRow, VerifyReport};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_NOT_CONVERGED: i32 = 2;

/// Name of the environment variable controlling log verbosity.
pub const LOG_ENV: &str = "FEDCONTRIB_LOG";

#[derive(Debug, Parser)]
#[command(
    name = "fedcontrib",
    version,
    about = "Data-contribution games in cross-silo federated learning"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run best-response dynamics and write the equilibrium.
    Solve(SolveArgs),
    /// Solve once per value of a client parameter.
    Sweep(SweepArgs),
    /// Fit the surrogate accuracy model to a sample file.
    Fit(FitArgs),
    /// Generate accuracy samples with the FedAvg simulator.
    Flsim(FlsimArgs),
    /// Check whether a profile is a Nash equilibrium.
    Verify(VerifyArgs),
}

/// Overrides applied on top of the config's game and solver sections.
#[derive(Debug, Clone, Default, Args)]
pub struct GameOverrides {
    /// Allocation mechanism: EG, LP, LOO or SV.
    #[arg(long)]
    pub mechanism: Option<Mechanism>,
    /// Best-response update scheme: jacobi or gauss_seidel.
    #[arg(long)]
    pub scheme: Option<UpdateScheme>,
    /// Uniform search-grid step.
    #[arg(long)]
    pub grid_step: Option<u64>,
    /// Include s_n = 0 in the search grid.
    #[arg(long, overrides_with = "no_zero")]
    pub include_zero: bool,
    /// Exclude s_n = 0 from the search grid.
    #[arg(long, overrides_with = "include_zero")]
    pub no_zero: bool,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    /// TOML game/simulator configuration
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long, default_value = "results/solve")]
    pub out: PathBuf,
    /// Overrides the config seed (recorded in the manifest).
    #[arg(long)]
    pub seed: Option<u64>,
    #[command(flatten)]
    pub overrides: GameOverrides,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// TOML game/simulator configuration
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long, default_value = "results/sweep")]
    pub out: PathBuf,
    /// Parameter to sweep: epsilon, mu or capacity.
    #[arg(long)]
    pub param: SweepParam,
    /// 1-based client ids whose parameter is set to each value.
    #[arg(long, value_delimiter = ',', required = true)]
    pub clients: Vec<usize>,
    /// Comma-separated parameter values, solved in order
    #[arg(long, value_delimiter = ',', required = true, allow_negative_numbers = true)]
    pub values: Vec<f64>,
    /// Retrain with the simulator at each equilibrium and report its accuracy.
    #[arg(long)]
    pub retrain: bool,
    /// Overrides the config seed
    #[arg(long)]
    pub seed: Option<u64>,
    #[command(flatten)]
    pub overrides: GameOverrides,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// CSV with columns s_1..s_N, eps_1..eps_N, accuracy and optionally weight.
    #[arg(long)]
    pub samples: PathBuf,
    #[arg(long, default_value = "results/fit")]
    pub out: PathBuf,
    /// Accuracy with no data, written into the fragment.
    #[arg(long, default_value_t = 0.1)]
    pub baseline: f64,
    /// Optional config; only its seed is used (for the manifest).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Overrides the config seed
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct FlsimArgs {
    /// TOML game/simulator configuration
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long, default_value = "results/flsim")]
    pub out: PathBuf,
    /// Overrides the config seed
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// TOML game/simulator configuration
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long, default_value = "results/verify")]
    pub out: PathBuf,
    /// Comma-separated profile s_1,..,s_N.
    #[arg(long, value_delimiter = ',', conflicts_with = "profile_file")]
    pub profile: Option<Vec<u64>>,
    /// A `summary.json` written by `solve`, or a file holding a comma-separated profile.
    #[arg(long)]
    pub profile_file: Option<PathBuf>,
    /// Absolute payoff tolerance; defaults to the config's.
    #[arg(long)]
    pub tolerance: Option<f64>,
    /// Overrides the config seed
    #[arg(long)]
    pub seed: Option<u64>,
    #[command(flatten)]
    pub overrides: GameOverrides,
}

/// Parses `args` (including the program name) and runs the command; returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match commands::dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_ERROR
        }
    }
}
