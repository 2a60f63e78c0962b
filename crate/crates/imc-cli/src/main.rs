//! `imc` — analysis toolkit for imprecise Markov chains.
//!
//! Subcommands: `analyze` (ergodicity and stationarity), `hitting` (expected
//! transition/return times), `simulate` (Monte-Carlo ergodic check with CSV
//! output), `verify` (property suites). Reports are deterministic for fixed
//! inputs and seed; wall time goes to stderr. Exit codes: 0 success,
//! 1 property violation, 2 input error.

mod commands;
mod report;
mod spec_file;

use clap::{Parser, Subcommand};
use commands::{AnalyzeOpts, CliError, HittingOpts, ModeArg, SimulateOpts};
use std::path::PathBuf;
use std::time::Instant;

/// Default seed when neither `--seed` nor `IMC_SEED` is given.
const DEFAULT_SEED: u64 = 42;

#[derive(Parser)]
#[command(
    name = "imc",
    version,
    about = "Imprecise Markov chains: exact lower-expectation analysis and Monte-Carlo verification"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Ergodicity coefficients, PF-like verdict, stationary lower
    /// expectations and the stationarity check.
    Analyze {
        /// Chain specification file (TOML).
        spec: PathBuf,
        /// Largest operator power examined (default 2 |X|^2).
        #[arg(long)]
        r_max: Option<usize>,
        /// Iteration tolerance and stationarity threshold.
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        /// Candidate gambles: indicators01 | grid.
        #[arg(long, default_value = "grid")]
        mode: ModeArg,
        /// Random gambles per maximization in grid mode.
        #[arg(long, default_value_t = 64)]
        grid_samples: usize,
        /// Extra gamble to analyze, comma-separated values.
        #[arg(long)]
        gamble: Option<String>,
        /// RNG seed (falls back to IMC_SEED, then 42).
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Lower and upper expected transition/return times toward a target
    /// state.
    Hitting {
        /// Chain specification file (TOML).
        spec: PathBuf,
        /// Target state label.
        target: String,
        /// Componentwise stopping tolerance.
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        /// Iteration cap.
        #[arg(long, default_value_t = 1_000_000)]
        max_iter: usize,
        /// Values above the cap are declared infinite.
        #[arg(long, default_value_t = 1e12)]
        cap: f64,
        /// RNG seed (report header only).
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Sample compatible precise processes and compare running averages
    /// against the stationary lower expectation.
    Simulate {
        /// Chain specification file (TOML).
        spec: PathBuf,
        /// Gamble values, comma-separated.
        #[arg(long)]
        gamble: Option<String>,
        /// Indicator gamble of a labelled state.
        #[arg(long)]
        indicator: Option<String>,
        /// Vertex selection policy: adversarial | random | vertex:K.
        #[arg(long, default_value = "adversarial")]
        policy: String,
        /// Number of sampled paths.
        #[arg(long, default_value_t = 200)]
        n_paths: usize,
        /// Steps per path.
        #[arg(long, default_value_t = 10_000)]
        length: usize,
        /// Slack subtracted from the threshold.
        #[arg(long, default_value_t = 0.05)]
        delta: f64,
        /// RNG seed (falls back to IMC_SEED, then 42).
        #[arg(long)]
        seed: Option<u64>,
        /// Write per-path CSV rows here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a property suite: coherence | identity | oracle | martingale.
    Verify {
        /// Chain specification file (TOML).
        spec: PathBuf,
        /// Suite name.
        #[arg(long)]
        suite: String,
        /// RNG seed (falls back to IMC_SEED, then 42).
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn resolve_seed(flag: Option<u64>) -> u64 {
    flag.or_else(|| {
        std::env::var("IMC_SEED")
            .ok()
            .and_then(|s| s.parse().ok())
    })
    .unwrap_or(DEFAULT_SEED)
}

fn run(cli: Cli) -> Result<String, CliError> {
    match cli.command {
        Command::Analyze {
            spec,
            r_max,
            tol,
            mode,
            grid_samples,
            gamble,
            seed,
        } => commands::cmd_analyze(
            &spec,
            &AnalyzeOpts {
                r_max,
                tol,
                mode,
                grid_samples,
                gamble,
                seed: resolve_seed(seed),
            },
        ),
        Command::Hitting {
            spec,
            target,
            tol,
            max_iter,
            cap,
            seed,
        } => commands::cmd_hitting(
            &spec,
            &target,
            &HittingOpts {
                tol,
                max_iter,
                cap,
                seed: resolve_seed(seed),
            },
        ),
        Command::Simulate {
            spec,
            gamble,
            indicator,
            policy,
            n_paths,
            length,
            delta,
            seed,
            out,
        } => commands::cmd_simulate(
            &spec,
            &SimulateOpts {
                gamble,
                indicator,
                policy,
                n_paths,
                length,
                delta,
                seed: resolve_seed(seed),
                out,
            },
        ),
        Command::Verify { spec, suite, seed } => {
            commands::cmd_verify(&spec, &suite, resolve_seed(seed))
        }
    }
}

fn main() {
    let cli = Cli::parse();
    let start = Instant::now();
    let outcome = run(cli);
    let elapsed_ms = start.elapsed().as_millis();
    match outcome {
        Ok(body) => {
            print!("{body}");
            eprintln!("wall-time-ms: {elapsed_ms}");
        }
        Err(e) => {
            eprintln!("error: {}", e.message());
            eprintln!("wall-time-ms: {elapsed_ms}");
            std::process::exit(e.exit_code());
        }
    }
}
