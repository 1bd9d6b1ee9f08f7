//! `ssta`: distributions of the maximum of correlated Gaussian delays, Monte
//! Carlo experiments and timing-graph analysis, written as CSV/JSON data.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod output;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(name = "ssta", version, about)]
struct Cli {
    /// Directory receiving all output files.
    #[arg(long, global = true, env = "SSTA_OUT_DIR", default_value = ".")]
    out_dir: PathBuf,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Tabulate the Gumbel law or one of its correlation-corrected forms.
    Dist(DistArgs),
    /// Monte Carlo maxima of AR(1) Gaussian chains.
    Mc(McArgs),
    /// Paths, path covariance or full delay analysis of a timing graph.
    Graph {
        #[command(subcommand)]
        action: GraphAction,
    },
    /// Maxima of independent but non-identical normals versus n.
    Noniid(NonIidArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, Serialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum DistKind {
    Gumbel,
    First,
    Second,
    Complete,
}

#[derive(ValueEnum, Clone, Copy, Debug, Serialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum OrderArg {
    First,
    Second,
    Complete,
}

#[derive(Args, Debug, Serialize)]
pub struct DistArgs {
    #[arg(value_enum)]
    pub kind: DistKind,
    /// Number of variables (taken from --eps-file when omitted there).
    #[arg(long)]
    pub n: Option<usize>,
    /// AR(1) correlation: eps_ij = rho^|i-j|.
    #[arg(long, conflicts_with = "eps_file")]
    pub rho: Option<f64>,
    /// Square matrix file (whitespace or comma separated, `#` comments)
    /// holding either eps with zero diagonal or a unit-diagonal correlation.
    #[arg(long)]
    pub eps_file: Option<PathBuf>,
    /// Grid start; defaults to alpha - 2.
    #[arg(long, allow_negative_numbers = true)]
    pub z_min: Option<f64>,
    /// Grid end; defaults to alpha + 4.
    #[arg(long, allow_negative_numbers = true)]
    pub z_max: Option<f64>,
    /// Number of grid intervals (steps + 1 points).
    #[arg(long, default_value_t = 600)]
    pub steps: usize,
}

#[derive(Args, Debug, Serialize)]
pub struct McArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, conflicts_with = "rho_sweep")]
    pub rho: Option<f64>,
    /// Inclusive sweep `start:stop:step`.
    #[arg(long)]
    pub rho_sweep: Option<String>,
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    #[arg(long, default_value_t = 10_000)]
    pub reps: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1)]
    #[serde(skip)]
    pub workers: usize,
    /// Histogram bins; Freedman-Diaconis when omitted.
    #[arg(long)]
    pub bins: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum GraphAction {
    /// List source-to-sink paths.
    Paths(GraphArgs),
    /// Write the path correlation matrix.
    Cov(GraphArgs),
    /// Full analysis with Monte Carlo cross-check.
    Analyze(AnalyzeArgs),
}

#[derive(Args, Debug, Serialize)]
pub struct GraphArgs {
    /// Edge-list text file or JSON graph.
    pub file: PathBuf,
    #[arg(long, default_value_t = ssta_core::timing_graph::DEFAULT_PATH_CAP)]
    pub cap: usize,
}

#[derive(Args, Debug, Serialize)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub graph: GraphArgs,
    #[arg(long, value_enum, default_value = "second")]
    pub order: OrderArg,
    #[arg(long, default_value_t = 10_000)]
    pub reps: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1)]
    #[serde(skip)]
    pub workers: usize,
}

#[derive(Args, Debug, Serialize)]
pub struct NonIidArgs {
    /// Comma-separated variable counts.
    #[arg(long, value_delimiter = ',', default_value = "10,50,100,500")]
    pub n_grid: Vec<usize>,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub mu: f64,
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    #[arg(long, default_value_t = 0.0)]
    pub delta_mu: f64,
    #[arg(long, default_value_t = 0.0)]
    pub delta_sigma: f64,
    #[arg(long, default_value_t = 10_000)]
    pub reps: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1)]
    #[serde(skip)]
    pub workers: usize,
    /// Draw per-variable (mu_i, sigma_i) once per n rather than per repetition.
    #[arg(long)]
    pub freeze: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let out = cli.out_dir.as_path();
    let result = match &cli.command {
        Command::Dist(a) => commands::dist(a, out),
        Command::Mc(a) => commands::mc(a, out),
        Command::Graph { action } => match action {
            GraphAction::Paths(a) => commands::graph_paths(a, out),
            GraphAction::Cov(a) => commands::graph_cov(a, out),
            GraphAction::Analyze(a) => commands::graph_analyze(a, out),
        },
        Command::Noniid(a) => commands::noniid(a, out),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
