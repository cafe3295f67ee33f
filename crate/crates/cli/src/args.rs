use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use stardisc::{EvalMode, DEFAULT_BUDGET};

/// Seed used when none is given, so default runs are reproducible.
pub const DEFAULT_SEED: u64 = 20_120_101;

#[derive(Debug, Parser)]
#[command(
    name = "stardisc",
    version,
    about = "Low star-discrepancy generalized Halton point sets"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write the first n points of a generalized Halton sequence.
    Generate(GenerateArgs),
    /// Compute or bound the star discrepancy of a point-set file.
    Evaluate(EvaluateArgs),
    /// Search for a generating vector with small discrepancy at fixed n.
    Optimize(OptimizeArgs),
    /// Search for vectors needing few points to reach a target discrepancy.
    Inverse(InverseArgs),
    /// Discrepancy of the classic Halton set over a range of n.
    Baseline(BaselineArgs),
    /// Re-run a recorded optimize, inverse or baseline run.
    Replay(ReplayArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Exact,
    Ta,
    Auto,
}

impl From<Mode> for EvalMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Exact => EvalMode::Exact,
            Mode::Ta => EvalMode::Ta,
            Mode::Auto => EvalMode::Auto,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct GenerateArgs {
    /// Dimension; optional with --vector, where it is checked against the file.
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long)]
    pub n: usize,
    /// Generating-vector JSON file.
    #[arg(
        long,
        conflicts_with = "identity",
        required_unless_present = "identity"
    )]
    pub vector: Option<PathBuf>,
    /// Use identity permutations (the classic Halton sequence).
    #[arg(long)]
    pub identity: bool,
    /// Output file; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub points: PathBuf,
    /// Exact grid enumeration, refused above the budget.
    #[arg(long, conflicts_with = "ta")]
    pub exact: bool,
    /// Threshold-accepting lower bound.
    #[arg(long)]
    pub ta: bool,
    /// Largest grid (in cells) evaluated exactly.
    #[arg(long, env = "STARDISC_BUDGET", default_value_t = DEFAULT_BUDGET)]
    pub budget: u64,
    #[arg(long, default_value_t = 10)]
    pub runs: usize,
    #[arg(long, default_value_t = 4000)]
    pub iters: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Print a JSON object instead of text.
    #[arg(long)]
    pub json: bool,
}

/// Optimizer settings; unset values follow the defaults for the dimension.
#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct GaArgs {
    #[arg(long)]
    pub generations: Option<usize>,
    #[arg(long)]
    pub mu: Option<usize>,
    #[arg(long)]
    pub lambda: Option<usize>,
    /// Crossover probability.
    #[arg(long)]
    pub pc: Option<f64>,
    /// Mutation probability.
    #[arg(long)]
    pub pm: Option<f64>,
    /// Per-position selection probability of the mutation.
    #[arg(long)]
    pub match_prob: Option<f64>,
    #[arg(long)]
    pub tournament: Option<usize>,
    #[arg(long, value_enum)]
    pub mode: Option<Mode>,
    /// Iterations per threshold-accepting run.
    #[arg(long)]
    pub ta_iters: Option<usize>,
    /// Threshold-accepting runs per fitness evaluation.
    #[arg(long)]
    pub ta_runs: Option<usize>,
    /// Runs per candidate in the final heuristic re-scoring.
    #[arg(long)]
    pub final_runs: Option<usize>,
    #[arg(long, env = "STARDISC_BUDGET", default_value_t = DEFAULT_BUDGET)]
    pub budget: u64,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct OptimizeArgs {
    #[arg(long)]
    pub dim: usize,
    #[arg(long)]
    pub n: usize,
    #[command(flatten)]
    pub ga: GaArgs,
    /// Run directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct InverseArgs {
    #[arg(long)]
    pub dim: usize,
    #[arg(long)]
    pub epsilon: f64,
    /// Smallest and largest point count searched.
    #[arg(long, num_args = 2, value_names = ["A", "B"])]
    pub bounds: Vec<usize>,
    #[command(flatten)]
    pub ga: GaArgs,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct BaselineArgs {
    #[arg(long)]
    pub dim: usize,
    /// First point count.
    #[arg(long, default_value_t = 1)]
    pub from: usize,
    /// Last point count (inclusive).
    #[arg(long)]
    pub to: usize,
    #[arg(long, value_enum, default_value_t = Mode::Auto)]
    pub mode: Mode,
    #[arg(long, env = "STARDISC_BUDGET", default_value_t = DEFAULT_BUDGET)]
    pub budget: u64,
    #[arg(long, default_value_t = 10)]
    pub runs: usize,
    #[arg(long, default_value_t = 4000)]
    pub iters: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct ReplayArgs {
    /// Manifest written by an earlier run.
    #[arg(long)]
    pub manifest: PathBuf,
    /// Directory for the new run.
    #[arg(long)]
    pub out: PathBuf,
}
