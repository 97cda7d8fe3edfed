//! Command-line front end. [`run`] parses arguments, resolves them against an
//! optional `key=value` config file and returns the process exit code:
//! 0 when every requested check passes, 1 when one fails, 2 on usage errors.

mod config;
mod commands;

use std::ffi::OsString;

use clap::{Args, Parser, Subcommand};

pub use config::RunConfig;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "mshape", version, about = "Shape and support checks for martingale conditional expectations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Simulate,
    Condexp,
    Verify,
    Support,
    Couple,
    Counterexample,
    All,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Simulate a path bundle and check the martingale drift.
    Simulate(Flags),
    /// Solve for the conditional-expectation surface and cross-check it by Monte Carlo.
    Condexp(Flags),
    /// Run the shape checks implied by the payoff on a PDE surface.
    Verify(Flags),
    /// Estimate the marginal support and test out-of-sample containment.
    Support(Flags),
    /// Scan independent copies for crossings without touching.
    Couple(Flags),
    /// Counterexample surface, support and continuity checks.
    Counterexample(Flags),
    /// Run the full acceptance suite.
    All(Flags),
}

/// Flags shared by every subcommand. Unset flags fall back to the config
/// file, then to per-subcommand defaults.
#[derive(Args, Debug, Default, Clone)]
pub struct Flags {
    #[arg(long)]
    pub process: Option<String>,
    #[arg(long)]
    pub payoff: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    pub strike: Option<f64>,
    /// Lower slope bound for the Lipschitz check.
    #[arg(long, allow_negative_numbers = true)]
    pub k: Option<f64>,
    /// Upper slope bound for the Lipschitz check.
    #[arg(long = "K", allow_negative_numbers = true)]
    pub big_k: Option<f64>,
    #[arg(long)]
    pub nt: Option<usize>,
    #[arg(long)]
    pub nx: Option<usize>,
    /// Horizon.
    #[arg(long = "T")]
    pub horizon: Option<f64>,
    /// Half-width of the PDE window in units of `sigma_max * sqrt(T)`.
    #[arg(long)]
    pub xpad: Option<f64>,
    #[arg(long)]
    pub theta: Option<f64>,
    #[arg(long)]
    pub paths: Option<usize>,
    #[arg(long)]
    pub pairs: Option<usize>,
    /// Defaults to $MSHAPE_SEED when set.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub binwidth: Option<f64>,
    #[arg(long = "min-count")]
    pub min_count: Option<usize>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<String>,
    /// `key=value` file; flags override its entries.
    #[arg(long)]
    pub config: Option<String>,
    /// Also write every crossing event (couple).
    #[arg(long)]
    pub events: bool,
}

impl Command {
    fn split(self) -> (Kind, Flags) {
        match self {
            Command::Simulate(f) => (Kind::Simulate, f),
            Command::Condexp(f) => (Kind::Condexp, f),
            Command::Verify(f) => (Kind::Verify, f),
            Command::Support(f) => (Kind::Support, f),
            Command::Couple(f) => (Kind::Couple, f),
            Command::Counterexample(f) => (Kind::Counterexample, f),
            Command::All(f) => (Kind::All, f),
        }
    }
}

/// Parse `argv` (including the program name) and run. Messages go to
/// stdout and stderr.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_PASS };
            let _ = e.print();
            return code;
        }
    };
    let (kind, flags) = cli.command.split();
    let env_seed = std::env::var("MSHAPE_SEED").ok();
    let cfg = match RunConfig::resolve(kind, &flags, env_seed.as_deref()) {
        Ok(cfg) => cfg,
        Err(msg) => {
            eprintln!("mshape: {msg}");
            return EXIT_USAGE;
        }
    };
    match commands::execute(&cfg) {
        Ok(true) => EXIT_PASS,
        Ok(false) => EXIT_FAIL,
        Err(e) => {
            eprintln!("mshape: {e}");
            EXIT_USAGE
        }
    }
}
