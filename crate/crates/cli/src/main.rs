mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use ibeta::dynamics::BetaSpec;

#[derive(Parser, Debug)]
#[command(name = "ibeta", version, about = "Intermediate beta-transformations: orbits, densities, matching and M_beta")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct Common {
    /// Output format (each command has its own default).
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Write to this file instead of standard output.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
    /// Worker threads for scan and verify.
    #[arg(long, global = true, env = "IBETA_THREADS")]
    pub threads: Option<usize>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Subcommand, Debug, Clone, Serialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Command {
    /// Enclosure and minimal polynomial of beta_{q,m}.
    Multinacci {
        #[arg(long)]
        q: u32,
        #[arg(long)]
        m: usize,
        /// Enclosure width.
        #[arg(long, default_value_t = 1e-30)]
        width: f64,
    },
    /// Orbit of x: rows (n, value, digit).
    Orbit {
        #[arg(long)]
        beta: BetaSpec,
        /// Decimal or P/Q.
        #[arg(long)]
        alpha: String,
        /// 0, 1 or a rational in [0, 1].
        #[arg(long)]
        x: String,
        #[arg(long)]
        n: usize,
        /// Use the left-continuous map.
        #[arg(long)]
        tilde: bool,
    },
    /// Digits of the intermediate expansion of x and the residual.
    Expand {
        #[arg(long)]
        beta: BetaSpec,
        #[arg(long)]
        alpha: String,
        #[arg(long)]
        x: String,
        #[arg(long)]
        n: usize,
    },
    /// Matching record of the critical orbits (with delta-words for multinacci bases).
    Matching {
        #[arg(long)]
        beta: BetaSpec,
        #[arg(long)]
        alpha: String,
        #[arg(long, default_value_t = 10_000)]
        max_iter: usize,
    },
    /// Normalized invariant density on a grid: rows (x, g).
    Density {
        #[arg(long)]
        beta: BetaSpec,
        #[arg(long)]
        alpha: String,
        #[arg(long, default_value_t = 1000)]
        grid: usize,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
        #[arg(long)]
        tilde: bool,
    },
    /// M_beta(alpha).
    Mvalue {
        #[arg(long)]
        beta: BetaSpec,
        #[arg(long)]
        alpha: String,
        #[arg(long, value_enum, default_value_t = MethodArg::Series)]
        method: MethodArg,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
        #[arg(long, default_value_t = 1_000_000)]
        iters: usize,
        #[arg(long, default_value_t = 1000)]
        burn_in: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 10_000)]
        max_iter: usize,
    },
    /// Closed-form slope, intercept and K for beta_{q,m} on [0, 1 - <beta>).
    Constants {
        #[arg(long)]
        q: u32,
        #[arg(long)]
        m: usize,
        /// Also report the simplified intercept formula.
        #[arg(long)]
        diagnostic: bool,
    },
    /// Matching intervals over an alpha range.
    Scan {
        #[arg(long)]
        q: u32,
        #[arg(long)]
        m: usize,
        /// LO,HI with 0 <= LO < HI <= 1 (decimals or P/Q).
        #[arg(long, default_value = "0,1")]
        range: String,
        #[arg(long, default_value_t = 1024)]
        grid: usize,
        #[arg(long, default_value_t = 10_000)]
        max_iter: usize,
        /// Bisection depth for interval boundaries, in halvings of a grid cell.
        #[arg(long, default_value_t = 10)]
        refine_bits: u32,
        /// Also classify each interval as increasing or decreasing.
        #[arg(long)]
        classify: bool,
        /// Extra interior points per interval in CSV output.
        #[arg(long, default_value_t = 0)]
        points: usize,
        /// Additionally write the plotting CSV to this file.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Run a verification suite.
    Verify {
        /// Suite name, or "all".
        #[arg(long)]
        suite: String,
        #[arg(long)]
        q: Option<u32>,
        #[arg(long)]
        q_max: Option<u32>,
        #[arg(long)]
        m_max: Option<usize>,
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        horizon: Option<usize>,
        #[arg(long)]
        grid: Option<usize>,
        #[arg(long)]
        iters: Option<usize>,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodArg {
    Series,
    Finite,
    Birkhoff,
}

fn main() -> ExitCode {
    let cli = Cli::try_parse().unwrap_or_else(|e| e.exit());
    if let Some(n) = cli.common.threads {
        if n == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    match commands::run(&cli.common, &cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(commands::Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(commands::Failure::Compute(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
