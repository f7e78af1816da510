//! `pointmass` command-line tool.
//!
//! Exit codes: 0 success, 1 bad input, 2 numerical breakdown (a trace that
//! decreases, or a solve that lost the target), 3 a reproduction or sampling
//! check failed.

mod commands;
mod config;
mod reproduce;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(
    name = "pointmass",
    version,
    about = "Point-mass diagnostics for reproducing kernels"
)]
struct Cli {
    /// JSON file with default option values; command-line flags win.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a kernel or assemble its Gram matrix.
    #[command(subcommand)]
    Kernel(KernelCmd),
    /// Trace ||P_F δ_x||² along a filtration and classify the result.
    Diagnose(DiagnoseArgs),
    /// Green function, resistance and point-mass energies of a network.
    #[command(subcommand)]
    Network(NetworkCmd),
    /// Sample the Gaussian free field of a network and check it.
    #[command(subcommand)]
    Gff(GffCmd),
    /// Dyadic tree energies and boundary resistance.
    #[command(subcommand)]
    Tree(TreeCmd),
    /// Run the built-in checks for a named example.
    Reproduce(ReproduceArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Args, Clone, Default)]
pub struct KernelInput {
    /// Kernel document: {"kernel": {...}, "points": [...], "target": ...}.
    #[arg(long)]
    pub kernel: Option<PathBuf>,
    /// Comma-separated points overriding the document; `a..b` expands integers.
    #[arg(long)]
    pub points: Option<String>,
}

#[derive(Subcommand)]
pub enum KernelCmd {
    /// Print k(x, y).
    Eval {
        #[command(flatten)]
        input: KernelInput,
        #[arg(long)]
        x: String,
        #[arg(long)]
        y: String,
    },
    /// Write the Gram matrix over the point list.
    Gram {
        #[command(flatten)]
        input: KernelInput,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum)]
        format: Option<Format>,
    },
}

#[derive(Args, Clone, Default)]
pub struct Tolerances {
    #[arg(long)]
    pub tau_stab: Option<f64>,
    #[arg(long)]
    pub tau_div: Option<f64>,
    #[arg(long)]
    pub window: Option<usize>,
    #[arg(long)]
    pub slope_threshold: Option<f64>,
    #[arg(long)]
    pub ratio_threshold: Option<f64>,
}

#[derive(Args)]
pub struct DiagnoseArgs {
    #[command(flatten)]
    pub input: KernelInput,
    /// Target point; defaults to the document target, then the first point.
    #[arg(long)]
    pub target: Option<String>,
    /// Double the stage size instead of adding one point per stage.
    #[arg(long)]
    pub doubling: bool,
    #[command(flatten)]
    pub tolerances: Tolerances,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Clone, Default)]
pub struct NetworkOut {
    /// Network JSON: {"vertices": [...], "base": id, "edges": [[u, v, c], ...]}.
    #[arg(long)]
    pub network: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Subcommand)]
pub enum NetworkCmd {
    /// Green kernel k(x, y) over the non-base vertices.
    Green(NetworkOut),
    /// Effective resistance between all vertex pairs.
    Resistance(NetworkOut),
    /// ||δ_x||² = c(x) for each non-base vertex.
    DeltaNorm(NetworkOut),
}

#[derive(Args, Clone, Default)]
pub struct GffArgs {
    #[arg(long)]
    pub network: Option<PathBuf>,
    /// Number of draws.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Subcommand)]
pub enum GffCmd {
    /// Write `n` joint draws, one per row.
    Sample(GffArgs),
    /// Compare empirical covariances with the Green kernel; exit 3 beyond 5 standard errors.
    Check {
        #[command(flatten)]
        args: GffArgs,
        /// Check an existing sample CSV instead of drawing afresh.
        #[arg(long)]
        samples: Option<PathBuf>,
    },
}

#[derive(Args, Clone, Default)]
pub struct TreeArgs {
    /// Truncation depth; defaults to where the weight tail drops below 1e-8.
    #[arg(long)]
    pub depth: Option<usize>,
    /// `geometric:q`, `constant:c` or `file:path`.
    #[arg(long)]
    pub weights: Option<String>,
    /// Resistance of the root edges, r(0).
    #[arg(long)]
    pub r0: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Subcommand)]
pub enum TreeCmd {
    /// Energy of δ_α per level with multiplicities.
    Histogram(TreeArgs),
    /// Resistance between two words of length `depth`.
    Resistance {
        #[command(flatten)]
        args: TreeArgs,
        #[arg(long)]
        a: String,
        #[arg(long)]
        b: String,
    },
}

#[derive(Args)]
pub struct ReproduceArgs {
    /// brownian, bridge, binomial, network-path, tree or gff.
    pub name: String,
    #[arg(long)]
    pub depth: Option<usize>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Where `tree` writes its histogram.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Failure classes mapped onto exit codes.
#[derive(Debug)]
pub enum Failure {
    Input(String),
    Numerical(String),
    Check(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Input(_) => 1,
            Failure::Numerical(_) => 2,
            Failure::Check(_) => 3,
        }
    }
}

impl From<pointmass::Error> for Failure {
    fn from(e: pointmass::Error) -> Self {
        match e {
            pointmass::Error::MonotonicityViolation { .. }
            | pointmass::Error::NotInRange { .. }
            | pointmass::Error::SingularGram => Failure::Numerical(e.to_string()),
            _ => Failure::Input(e.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let usage = e.use_stderr();
            let _ = e.print();
            // usage errors are input errors; --help and --version succeed
            return if usage {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = config::load(cli.config.as_deref()).and_then(|cfg| match cli.command {
        Command::Kernel(cmd) => commands::kernel(cmd, &cfg),
        Command::Diagnose(args) => commands::diagnose(args, &cfg),
        Command::Network(cmd) => commands::network(cmd, &cfg),
        Command::Gff(cmd) => commands::gff(cmd, &cfg),
        Command::Tree(cmd) => commands::tree(cmd, &cfg),
        Command::Reproduce(args) => reproduce::run(args, &cfg),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Input(m) => eprintln!("error: {m}"),
                Failure::Numerical(m) => eprintln!("numerical breakdown: {m}"),
                Failure::Check(m) => eprintln!("check failed: {m}"),
            }
            ExitCode::from(f.code())
        }
    }
}
