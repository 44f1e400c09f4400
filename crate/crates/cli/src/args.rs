use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(
    name = "prepost",
    version,
    about = "Estimation with pre- and post-selected quantum ensembles",
    after_help = "Exit status: 0 success, 2 invalid input, 3 tolerance check failed, 4 runtime failure."
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Output format of the result document.
    #[arg(long, value_enum, default_value_t = OutFormat::Json, global = true)]
    pub out: OutFormat,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OutFormat {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Optimal covariant fidelity for N parallel spins.
    Parallel(ParallelArgs),
    /// Optimal covariant fidelity for N/2 + N/2 antiparallel spins with a
    /// fixed post-selection.
    Antiparallel(AntiparallelArgs),
    /// Unambiguous estimation with and without post-selection, as a table
    /// over epsilon.
    Use(UseArgs),
    /// Random-instance check of the POVM/Kraus correspondence.
    DualitySuite(SuiteArgs),
    /// Monte Carlo run of an estimation game described by a config file.
    Game(GameArgs),
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct ParallelArgs {
    /// Number of spins, 1 to 12.
    #[arg(short = 'n', long = "spins")]
    pub spins: usize,
    /// Nodes per Euler angle [default: 2N + 4, exact].
    #[arg(long)]
    pub quadrature_order: Option<usize>,
    /// Allowed deviation from (N+1)/(N+2).
    #[arg(long, default_value_t = 1e-9)]
    pub tolerance: f64,
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct AntiparallelArgs {
    /// Even number of spins; 2, 4 and 6 have reference values.
    #[arg(short = 'n', long = "spins")]
    pub spins: usize,
    /// Nodes per Euler angle [default: 2N + 4, exact].
    #[arg(long)]
    pub quadrature_order: Option<usize>,
    /// Allowed deviation from the reference value, where one exists.
    #[arg(long, default_value_t = 5e-4)]
    pub tolerance: f64,
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct UseArgs {
    /// Weight alpha^2 of |0> in the pre-selected pair, in (0.5, 1).
    #[arg(long, default_value_t = 0.8)]
    pub alpha_sq: f64,
    /// Comma-separated post-selection overlaps epsilon, each in [0, 1).
    #[arg(long = "eps", value_delimiter = ',', default_values_t = [0.0, 0.1, 0.05, 0.025])]
    pub epsilons: Vec<f64>,
    /// Monte Carlo trials per row for the simulated column; 0 skips it.
    #[arg(long, default_value_t = 100_000)]
    pub trials: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Allowed gap between the closed form and the conditional rule.
    #[arg(long, default_value_t = 1e-12)]
    pub tolerance: f64,
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct SuiteArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 200)]
    pub instances: usize,
    /// Largest pre or post dimension drawn.
    #[arg(long, default_value_t = 4)]
    pub max_dim: usize,
    /// Largest per-outcome probability deviation accepted.
    #[arg(long, default_value_t = 1e-10)]
    pub tolerance: f64,
    #[arg(long, hide = true)]
    pub inject_fault: bool,
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct GameArgs {
    /// Game description in TOML.
    #[arg(long, conflicts_with = "bundled", required_unless_present = "bundled")]
    pub config: Option<PathBuf>,
    /// Name of a bundled config: orthogonal-pair, use-eps0.1, parallel-N1.
    #[arg(long)]
    pub bundled: Option<String>,
    /// Overrides the config's trial count [default: 100000].
    #[arg(long)]
    pub trials: Option<u64>,
    /// Overrides the config's seed [default: 0].
    #[arg(long)]
    pub seed: Option<u64>,
    /// Accepted |empirical - analytic| in standard errors.
    #[arg(long, default_value_t = 3.0)]
    pub tolerance: f64,
}
