use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod input;
mod output;

#[derive(Parser, Debug)]
#[command(name = "rtorsion", version, about = "Reidemeister and Farber–Turaev torsion of flat bundles over cell complexes")]
pub struct Cli {
    /// Exact rational arithmetic; floating-point inputs are rejected.
    #[arg(long, global = true)]
    pub exact: bool,
    /// Tolerance for pass/fail verdicts (defaults depend on the command).
    #[arg(long, global = true, value_name = "X")]
    pub tol: Option<f64>,
    /// Machine-readable JSON output.
    #[arg(long, global = true)]
    pub json: bool,
    #[command(subcommand)]
    pub command: Command,
}

/// Where the complex, bundle and spray come from.
#[derive(Args, Debug, Clone)]
pub struct Inputs {
    /// Complex file (JSON).
    #[arg(long, value_name = "FILE", conflicts_with = "corpus")]
    pub complex: Option<PathBuf>,
    /// Built-in complex by name (see `corpus list`).
    #[arg(long, value_name = "NAME")]
    pub corpus: Option<String>,
    /// Bundle file; defaults to the corpus bundle, else the trivial line bundle.
    #[arg(long, value_name = "FILE")]
    pub bundle: Option<PathBuf>,
    /// Spray file; defaults to the corpus spray, else the canonical spray.
    #[arg(long, value_name = "FILE")]
    pub spray: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Check a complex description (and, with --bundle, flatness).
    Validate(Inputs),
    /// Euler characteristic and cell counts.
    Chi(Inputs),
    /// Integral homology.
    Homology {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long)]
        degree: Option<usize>,
    },
    /// Barycentric subdivision of complex, bundle and spray.
    Subdivide {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long, default_value_t = 1)]
        rounds: usize,
        /// Write complex.json, bundle.json, spray.json into this directory.
        #[arg(long, value_name = "DIR")]
        out: Option<PathBuf>,
    },
    /// Parallel transport along a path.
    Transport {
        #[command(flatten)]
        inputs: Inputs,
        /// Steps as JSON (`[{"edge":1,"dir":1}]`) or `@file`.
        #[arg(long)]
        path: String,
        /// Start vertex (default: base vertex).
        #[arg(long)]
        from: Option<u32>,
    },
    /// Kamber–Tondeur class, or its value on one loop.
    Kt {
        #[command(flatten)]
        inputs: Inputs,
        /// Closed loop at the base vertex, JSON steps or `@file`.
        #[arg(long = "loop", value_name = "STEPS")]
        loop_: Option<String>,
    },
    /// Euler structures.
    #[command(subcommand)]
    Euler(EulerCommand),
    /// Combinatorial and Farber–Turaev torsion.
    #[command(subcommand)]
    Torsion(TorsionCommand),
    /// Analytic torsion models.
    #[command(subcommand)]
    Analytic(AnalyticCommand),
    /// Invariance suites.
    #[command(subcommand)]
    Suite(SuiteCommand),
    /// Built-in complexes.
    #[command(subcommand)]
    Corpus(CorpusCommand),
}

#[derive(Subcommand, Debug)]
pub enum EulerCommand {
    /// Class u(α, β) ∈ H₁ with α = --spray and β = --beta.
    Diff {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long, value_name = "FILE")]
        beta: PathBuf,
    },
    /// Spray act(u, α).
    Act {
        #[command(flatten)]
        inputs: Inputs,
        /// H₁ coordinates, comma separated.
        #[arg(long, allow_hyphen_values = true)]
        u: String,
    },
    /// Prefix a loop at the base vertex to every leg.
    LoopModify {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long = "loop", value_name = "STEPS")]
        loop_: String,
    },
}

#[derive(Subcommand, Debug)]
pub enum TorsionCommand {
    Compute(Inputs),
    /// FT ratio between two inputs against its predicted value.
    Compare {
        #[command(flatten)]
        inputs: Inputs,
        /// Second spray.
        #[arg(long, value_name = "FILE", group = "change")]
        beta: Option<PathBuf>,
        /// Act on the spray by this H₁ class (comma separated coordinates).
        #[arg(long, allow_hyphen_values = true, group = "change")]
        u: Option<String>,
        /// Change the fiber basis at the base vertex by this matrix (JSON rows or `@file`).
        #[arg(long, value_name = "MATRIX", group = "change")]
        base_change: Option<String>,
    },
}

#[derive(Subcommand, Debug)]
pub enum AnalyticCommand {
    /// Flat bundle over a circle of given circumference.
    Circle {
        /// Holonomy as JSON rows, e.g. `[[0,-1],[1,0]]`, or `@file`.
        #[arg(long, value_name = "M")]
        holonomy: String,
        #[arg(long, default_value_t = 1.0)]
        circumference: f64,
        #[arg(long, default_value_t = 1_000_000)]
        truncation: usize,
    },
}

#[derive(Subcommand, Debug)]
pub enum SuiteCommand {
    Run {
        name: String,
        /// Only this property id (from a report's repro line).
        #[arg(long)]
        property: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
    },
    List,
}

#[derive(Subcommand, Debug)]
pub enum CorpusCommand {
    List,
    Get {
        name: String,
        /// Write complex.json, bundle.json, spray.json into this directory.
        #[arg(long, value_name = "DIR")]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    // die quietly on a closed pipe (`rtorsion ... | head`) instead of panicking
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
