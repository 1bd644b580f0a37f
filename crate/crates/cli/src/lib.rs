//! Command-line front end for `trframe`.
//!
//! Every command writes one JSON [`ResultDocument`](documents::ResultDocument).
//! Exit codes: 0 success, 1 failed `verify` suite, 2 monotone or
//! feasibility violation, 64 usage error, 65 malformed or invalid input.

#![forbid(unsafe_code)]

pub mod angle;
mod commands;
pub mod documents;
pub mod error;
pub mod verify;

use std::ffi::OsString;
use std::io::Read;

use clap::{Parser, Subcommand, ValueEnum};
use trframe::angular::PhaseConvention;

pub use commands::execute;
pub use error::CliError;

pub const DEFAULT_SEED: u64 = 1;
pub const DEFAULT_SHOTS: usize = 10_000;

fn angle_arg(s: &str) -> Result<f64, angle::AngleError> {
    angle::parse_angle(s)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ConventionArg {
    Ll,
    Sakurai,
}

impl From<ConventionArg> for PhaseConvention {
    fn from(c: ConventionArg) -> Self {
        match c {
            ConventionArg::Ll => PhaseConvention::LandauLifshitz,
            ConventionArg::Sakurai => PhaseConvention::Sakurai,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "trframe", version, about = "Time-reversal frameness: standard forms, monotones and TRIO conversion protocols")]
pub struct Cli {
    /// Time-reversal phase convention (overrides the input document).
    #[arg(long, global = true, value_enum)]
    pub convention: Option<ConventionArg>,

    /// Seed for every randomized step.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    pub seed: u64,

    /// Number of random trials (verify suites).
    #[arg(long, global = true)]
    pub trials: Option<usize>,

    /// Tolerance for normalization and property checks.
    #[arg(long, global = true, default_value_t = trframe::CHECK_TOL)]
    pub tol: f64,

    /// Input document, `-` for stdin.
    #[arg(long, global = true, default_value = "-")]
    pub input: String,

    /// Output file, `-` for stdout.
    #[arg(long, global = true, default_value = "-")]
    pub output: String,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Reduce a state to its standard resource and report the orthogonal transform.
    Standardize,
    /// Evaluate τ and τ∞ of a state.
    Tau,
    /// Synthesize a conversion instrument.
    Convert {
        #[command(subcommand)]
        mode: ConvertMode,
    },
    /// Asymptotic conversion rate τ∞(ψ)/τ∞(φ).
    Rate {
        #[arg(long = "theta-psi", value_parser = angle_arg, allow_hyphen_values = true)]
        theta_psi: f64,
        #[arg(long = "theta-phi", value_parser = angle_arg, allow_hyphen_values = true)]
        theta_phi: f64,
    },
    /// Largest number of target copies reachable from n input copies.
    Copies {
        #[arg(short, long)]
        n: u64,
        #[arg(long = "theta-psi", value_parser = angle_arg, allow_hyphen_values = true)]
        theta_psi: f64,
        #[arg(long = "theta-phi", value_parser = angle_arg, allow_hyphen_values = true)]
        theta_phi: f64,
    },
    /// Standard angle and binomial expansion of n copies of a standard resource.
    Power {
        #[arg(long, value_parser = angle_arg, allow_hyphen_values = true)]
        theta: f64,
        #[arg(short, long)]
        n: u32,
    },
    /// Apply the time-reversal group average to a density matrix or state.
    Average,
    /// Run a property-verification suite.
    Verify {
        #[arg(value_enum)]
        suite: verify::Suite,
    },
}

#[derive(Debug, Subcommand)]
pub enum ConvertMode {
    /// Deterministic θ → γ.
    Det {
        #[arg(long, value_parser = angle_arg, allow_hyphen_values = true)]
        theta: f64,
        #[arg(long, value_parser = angle_arg, allow_hyphen_values = true)]
        gamma: f64,
        #[arg(long, default_value_t = DEFAULT_SHOTS)]
        shots: usize,
    },
    /// θ → ensemble read from the input document.
    Ens {
        #[arg(long, value_parser = angle_arg, allow_hyphen_values = true)]
        theta: f64,
        #[arg(long, default_value_t = DEFAULT_SHOTS)]
        shots: usize,
    },
    /// θ → γ with maximal success probability.
    Pmax {
        #[arg(long, value_parser = angle_arg, allow_hyphen_values = true)]
        theta: f64,
        #[arg(long, value_parser = angle_arg, allow_hyphen_values = true)]
        gamma: f64,
        #[arg(long, default_value_t = DEFAULT_SHOTS)]
        shots: usize,
    },
}

/// Captured result of one invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct Invocation {
    pub exit_code: i32,
    pub stdout: String,
    pub stderr: String,
}

/// Parses `args` (including the program name), runs the command and writes
/// the output file if one was requested.
pub fn run<I, T>(args: I, stdin: &mut dyn Read) -> Invocation
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    Invocation { exit_code: 0, stdout: text, stderr: String::new() }
                }
                _ => Invocation { exit_code: error::EXIT_USAGE, stdout: String::new(), stderr: text },
            };
        }
    };
    let output = cli.output.clone();
    match execute(&cli, stdin) {
        Ok((doc, passed)) => {
            let text = doc.to_json();
            let exit_code = if passed { error::EXIT_OK } else { error::EXIT_VERIFY_FAILED };
            if output == "-" {
                Invocation { exit_code, stdout: text, stderr: String::new() }
            } else {
                match std::fs::write(&output, text) {
                    Ok(()) => Invocation { exit_code, stdout: String::new(), stderr: String::new() },
                    Err(e) => fail(&CliError::Io(format!("{output}: {e}"))),
                }
            }
        }
        Err(e) => fail(&e),
    }
}

fn fail(e: &CliError) -> Invocation {
    Invocation { exit_code: e.exit_code(), stdout: String::new(), stderr: format!("trframe: {e}\n") }
}
