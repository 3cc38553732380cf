//! The `gic` command line: LP summaries, cut generation, evaluation,
//! sweeps, exact verification suites and reports.

pub mod commands;
pub mod config;
pub mod verify;

use std::path::PathBuf;

use clap::{Parser, Subcommand};
use thiserror::Error;

use crate::config::GenFlags;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Parse(String),
    #[error("{0}")]
    Infeasible(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{0}")]
    Harness(String),
    #[error("verification failed: {0}")]
    Verification(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse(_) => 2,
            CliError::Infeasible(_) => 3,
            CliError::Config(_) => 4,
            CliError::Harness(_) | CliError::Verification(_) => 1,
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "gic", version, about = "Generalized intersection cuts from partial hyperplane activation")]
pub struct Cli {
    /// Worker threads for sweeps and per-split generation.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Solve the LP relaxation and print its optimum.
    Solve {
        instance: PathBuf,
    },
    /// Generate cuts, writing cuts.json and trace.jsonl.
    Gics {
        instance: PathBuf,
        #[command(flatten)]
        flags: GenFlags,
        /// Output directory.
        #[arg(long, default_value = ".")]
        out: PathBuf,
        /// Known optima table, used to print gap closed.
        #[arg(long)]
        optima: Option<PathBuf>,
    },
    /// Gap closed by the cuts in a cuts.json file.
    Evaluate {
        instance: PathBuf,
        #[arg(long, default_value = "cuts.json")]
        cuts: PathBuf,
        #[arg(long)]
        optima: PathBuf,
    },
    /// Run a configuration grid over a list of instances.
    Sweep {
        /// `table2` for the full grid, `desk` for every criterion, tilting and
        /// `kh` setting with the given families, `single` for the flags alone.
        #[arg(long, default_value = "table2")]
        grid: String,
        /// File listing instance paths, one per line.
        #[arg(long)]
        instances: PathBuf,
        #[arg(long)]
        optima: Option<PathBuf>,
        #[arg(long, default_value = ".")]
        out: PathBuf,
        #[command(flatten)]
        flags: GenFlags,
    },
    /// Run exact verification suites on small problems.
    Verify {
        /// appendix-c, validity, monotonicity, parallel, dominance, growth,
        /// closure or all.
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Scale factor for randomized trial counts.
        #[arg(long, default_value_t = 1.0)]
        scale: f64,
    },
    /// Render results.csv as Markdown tables.
    Report {
        results: PathBuf,
        /// points_vs_rays.csv from the same sweep.
        #[arg(long)]
        points: Option<PathBuf>,
        /// Write the report here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(n) = cli.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global()
            .map_err(|e| CliError::Harness(e.to_string()))?;
    }
    match cli.command {
        Command::Solve { instance } => commands::solve(&instance),
        Command::Gics {
            instance,
            flags,
            out,
            optima,
        } => commands::gics(&instance, flags, &out, optima.as_deref()),
        Command::Evaluate { instance, cuts, optima } => commands::evaluate(&instance, &cuts, &optima),
        Command::Sweep {
            grid,
            instances,
            optima,
            out,
            flags,
        } => commands::sweep(&grid, &instances, optima.as_deref(), &out, flags),
        Command::Verify { suite, seed, scale } => verify::run(&suite, seed, scale),
        Command::Report { results, points, out } => commands::report(&results, points.as_deref(), out.as_deref()),
    }
}
