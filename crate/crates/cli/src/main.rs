use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;
mod io;

#[derive(Parser, Debug)]
#[command(name = "momentsupp", version, about = "Growth, support and atom analysis of truncated moment sequences")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Output path, `-` for stdout.
    #[arg(short, long, default_value = "-")]
    output: PathBuf,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    /// Seed for separating forms and sample polynomials.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Debug, Clone)]
struct Input {
    /// Moment JSON file, `-` for stdin.
    #[arg(default_value = "-")]
    input: PathBuf,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write the moments of an atomic measure or a named family.
    Gen {
        /// Atoms as `(point:weight),...`, e.g. `(-1:3/4),(1/2:1/4)`.
        #[arg(long, conflicts_with = "family", required_unless_present = "family")]
        atoms: Option<String>,
        /// `uniform01`, `gaussian` or `dirac-series:N`.
        #[arg(long)]
        family: Option<String>,
        #[arg(long)]
        degree: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Positivity, Cauchy-Schwarz, monotonicity, kernel and seminorm checks.
    Check {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        common: Common,
    },
    /// Ladder, root sequence and boundedness verdict of one polynomial.
    Growth {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value = "X1")]
        poly: String,
        #[command(flatten)]
        thresholds: ThresholdArgs,
        #[command(flatten)]
        common: Common,
    },
    /// Coordinate box containing the support.
    Box {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value_t = 0.05)]
        slack: f64,
        #[command(flatten)]
        thresholds: ThresholdArgs,
        #[command(flatten)]
        common: Common,
    },
    /// Upper bounds on the mass of one point.
    Mass {
        #[command(flatten)]
        input: Input,
        /// Point coordinates, comma separated rationals.
        #[arg(long, allow_hyphen_values = true)]
        alpha: String,
        #[arg(short = 'd', long, default_value_t = 2)]
        d: u32,
        /// Largest bump level.
        #[arg(long, default_value_t = 64)]
        budget: usize,
        /// Other suspected atoms the separating form must distinguish.
        #[arg(long, allow_hyphen_values = true)]
        candidate: Vec<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Finite-support certificate.
    Finite {
        #[command(flatten)]
        input: Input,
        #[arg(short = 'd', long, default_value_t = 2)]
        d: u32,
        /// Candidate atoms, comma separated rationals; repeatable.
        #[arg(long, allow_hyphen_values = true)]
        candidate: Vec<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Recover atoms with the Hankel method or a certified grid scan.
    Recover {
        #[command(flatten)]
        input: Input,
        #[arg(long, value_enum, default_value = "prony")]
        method: Method,
        #[arg(long, default_value_t = 41)]
        resolution: usize,
        #[arg(short = 'd', long, default_value_t = 2)]
        d: u32,
        #[arg(long, default_value_t = 0.1)]
        floor: f64,
        #[arg(long, default_value_t = 0.05)]
        slack: f64,
        #[arg(long, default_value_t = 5_000)]
        max_cells: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Every analysis with default parameters in one JSON document.
    Report {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Method {
    Prony,
    Grid,
}

#[derive(Args, Debug, Clone)]
struct ThresholdArgs {
    #[arg(long, default_value_t = 1e-3)]
    increment_tol: f64,
    #[arg(long, default_value_t = 0.75)]
    contraction_ratio: f64,
    #[arg(long, default_value_t = 0.25)]
    divergence_slope: f64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("momentsupp: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
