//! `trace-lab`: eigen reports, segments, trace hierarchies and densities of
//! states for one-dimensional substitution Delone sets.

mod commands;
mod setup;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "trace-lab", version, about = "Asymptotic trace hierarchies of substitution Delone sets")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Debug)]
pub struct Common {
    /// Rule file; the built-in three-letter example when omitted.
    #[arg(long, value_name = "FILE")]
    pub rule: Option<PathBuf>,
    /// Seed letters around the origin.
    #[arg(long, value_name = "L-,L+")]
    pub seed: Option<String>,
    /// Directory for report files; reports go to stdout when omitted.
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Exact rational eigen data (default).
    #[arg(long, conflicts_with = "float")]
    pub exact: bool,
    /// Floating-point eigen data.
    #[arg(long)]
    pub float: bool,
}

#[derive(Args, Clone, Debug)]
pub struct Schedule {
    /// Largest scale n of the windows T = ν₁ⁿ·T₀.
    #[arg(long, default_value_t = 8)]
    pub nmax: usize,
    /// Phases T₀ per scale.
    #[arg(long, default_value_t = 8)]
    pub phases: usize,
}

#[derive(Args, Clone, Debug)]
pub struct OperatorArgs {
    /// Operator spec, or `@FILE` to read it from a file.
    #[arg(long, value_name = "SPEC")]
    pub op: String,
    /// Largest operator power or polynomial degree accepted.
    #[arg(long, value_name = "D", default_value_t = 4)]
    pub degree_cap: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Abelianization, eigen structure, frequencies and currents as JSON.
    Analyze {
        #[command(flatten)]
        common: Common,
    },
    /// Points of the Delone set in [−T, T] as CSV.
    Generate {
        #[command(flatten)]
        common: Common,
        /// Window half-width T.
        #[arg(long, short = 'T', value_name = "T")]
        window: f64,
    },
    /// Deviation series of tr φ(A|_{[−T,T]}) over the window schedule.
    Trace {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        schedule: Schedule,
        #[command(flatten)]
        operator: OperatorArgs,
        /// Polynomial φ as coefficients c0,c1,… (lowest degree first).
        #[arg(long, value_name = "C0,C1,…", default_value = "0,1")]
        phi: String,
        /// Index i,j,k to report; every rapidly expanding index when omitted.
        #[arg(long, value_name = "I,J,K")]
        index: Vec<String>,
    },
    /// Integrated density of states and trace-per-volume convergence.
    Ids {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        schedule: Schedule,
        #[command(flatten)]
        operator: OperatorArgs,
        /// Window half-width of the eigensolve; ν₁⁵ when omitted.
        #[arg(long, short = 'T', value_name = "T")]
        window: Option<f64>,
    },
    /// Checks every constant of the built-in three-letter example.
    VerifyExample {
        #[arg(long, conflicts_with = "float")]
        exact: bool,
        #[arg(long)]
        float: bool,
        #[arg(long, value_name = "DIR")]
        out: Option<PathBuf>,
        /// Adds DELTA to the computed constant NAME before comparison.
        #[arg(long, value_name = "NAME=DELTA", hide = true)]
        inject_fault: Option<String>,
    },
}

/// Exit status: 0 success, 1 verification failure, 2 input error.
pub enum Failure {
    Verification,
    Input(String),
}

impl From<trace_lab_core::Error> for Failure {
    fn from(e: trace_lab_core::Error) -> Self {
        Failure::Input(e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Input(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Analyze { common } => commands::analyze(&common),
        Command::Generate { common, window } => commands::generate(&common, window),
        Command::Trace { common, schedule, operator, phi, index } => {
            commands::trace(&common, &schedule, &operator, &phi, &index)
        }
        Command::Ids { common, schedule, operator, window } => commands::ids(&common, &schedule, &operator, window),
        Command::VerifyExample { float, out, inject_fault, .. } => {
            commands::verify_example(float, out.as_deref(), inject_fault.as_deref())
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verification) => ExitCode::from(1),
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
