//! `mexp`: expansion invariants of measured graphs from the command line.
//!
//! Exit status: 0 on success (including "inequality holds"), 1 when a
//! verified inequality or identity fails, 2 on usage or input errors.

mod commands;
mod output;

use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

#[derive(Parser, Debug)]
#[command(name = "mexp", version, about = "Expansion invariants of finite measured graphs")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Graph document (JSON).
    #[arg(long, global = true)]
    pub input: Option<std::path::PathBuf>,
    /// Seed for every randomized step.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Largest vertex count for exhaustive enumeration.
    #[arg(long, global = true, default_value_t = mexp_core::cheeger::DEFAULT_CAP)]
    pub cap: usize,
    /// Eigenvalues below this are treated as zero.
    #[arg(long, global = true, default_value_t = mexp_core::spectral::ZERO_TOLERANCE)]
    pub tolerance: f64,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Exact Cheeger constant, or the R-boundary profile with --alpha.
    Cheeger {
        #[arg(long, value_enum, default_value_t = Flavor::Vertex)]
        flavor: Flavor,
        /// Measure constraining feasible sets in the conductance flavor.
        #[arg(long, value_enum, default_value_t = Constraint::Stationary)]
        constraint: Constraint,
        /// Compute the asymptotic profile for these alphas instead (e.g. 1/2,1/4).
        #[arg(long, value_delimiter = ',')]
        alpha: Vec<String>,
    },
    /// Spectrum of the random-walk or measured Laplacian.
    Spectrum {
        #[arg(long, value_enum, default_value_t = Operator::Delta)]
        operator: Operator,
    },
    /// Multi-start estimate of the optimal Lp-Poincare constant.
    Poincare {
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        #[arg(long, default_value_t = mexp_core::poincare::DEFAULT_RESTARTS)]
        restarts: usize,
    },
    /// Check one of the inequalities on the input graph.
    Verify {
        #[arg(long, value_enum)]
        theorem: Theorem,
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        #[arg(long, default_value_t = mexp_core::poincare::DEFAULT_RESTARTS)]
        restarts: usize,
        /// Vertex ids of A (distance-bound).
        #[arg(long = "set-a", value_delimiter = ',')]
        set_a: Vec<String>,
        /// Vertex ids of B (distance-bound).
        #[arg(long = "set-b", value_delimiter = ',')]
        set_b: Vec<String>,
        /// Nonnegative rationals, one per vertex in document order (coarea).
        #[arg(long, value_delimiter = ',')]
        function: Vec<String>,
    },
    /// Level-set decomposition of the edge energy of a nonnegative function.
    Coarea {
        /// One rational per vertex in document order; seeded random if omitted.
        #[arg(long, value_delimiter = ',')]
        function: Vec<String>,
    },
    /// Finite-family verdicts over a directory of graph documents.
    Family {
        #[arg(long)]
        dir: std::path::PathBuf,
        #[arg(long)]
        threshold: String,
    },
    /// Generalised-expander certificate for a directory of graph documents.
    Certify {
        #[arg(long)]
        dir: std::path::PathBuf,
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        /// JSON list of [t, rho(t)] breakpoints; identity if omitted.
        #[arg(long)]
        rho: Option<std::path::PathBuf>,
        /// Default test maps per member.
        #[arg(long, default_value_t = 16)]
        maps: usize,
    },
    /// Write a generated graph document to stdout.
    Generate {
        #[arg(value_enum)]
        kind: Kind,
        /// Size parameters: n (cycle, path, complete), leaves (star), d (hypercube), n k (random-regular), n (random-connected, gnp).
        params: Vec<usize>,
        #[arg(long, value_enum, default_value_t = Measure::Counting)]
        measure: Measure,
        /// Edge probability for random-connected and gnp.
        #[arg(long, default_value_t = 0.3)]
        edge_probability: f64,
        /// Explicit measure values (with --measure explicit).
        #[arg(long, value_delimiter = ',')]
        values: Vec<String>,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum Flavor {
    Vertex,
    Conductance,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum Constraint {
    /// The walk's stationary measure.
    Stationary,
    /// The graph's own measure.
    Measure,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum Operator {
    Delta,
    Lambda,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum Theorem {
    CheegerSandwich,
    MeasuredSandwich,
    GapControls,
    DistanceBound,
    PoincareToCheeger,
    Coarea,
    LpPoincare,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum Kind {
    Cycle,
    Path,
    Complete,
    Star,
    Hypercube,
    RandomRegular,
    RandomConnected,
    Gnp,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum Measure {
    Counting,
    Probability,
    Rationals,
    Explicit,
}

/// What a command produced: a JSON body, plus whether a checked statement failed.
pub struct Outcome {
    pub results: Value,
    pub inputs: Value,
    pub violation: bool,
    /// Emit `results` bare instead of wrapped in a report.
    pub raw: bool,
}

fn configure_threads() -> Result<(), String> {
    if let Ok(value) = std::env::var("MEXP_THREADS") {
        let threads: usize = value
            .parse()
            .map_err(|_| format!("MEXP_THREADS must be a positive integer, got {value:?}"))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| e.to_string())?;
    }
    Ok(())
}

/// Writes to stdout, ignoring a closed pipe.
fn emit(text: &str) {
    use std::io::Write;
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{text}");
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    let start = Instant::now();
    match commands::run(&cli) {
        Ok(outcome) => {
            if outcome.raw {
                emit(&output::to_string(&outcome.results));
            } else {
                let report = json!({
                    "command": std::env::args().skip(1).collect::<Vec<_>>(),
                    "inputs": outcome.inputs,
                    "results": outcome.results,
                    "timing": {"seconds": start.elapsed().as_secs_f64()},
                    "version": env!("CARGO_PKG_VERSION"),
                    "seed": cli.common.seed,
                });
                emit(&output::to_string(&report));
            }
            if outcome.violation {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
