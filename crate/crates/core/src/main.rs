//! Command-line entry point.
//!
//! Exit codes: 0 solved, 2 parse/usage error, 3 assumption-violation
//! diagnostic, 4 internal invariant failure.

use clap::{Parser, Subcommand, ValueEnum};
use std::path::PathBuf;
use std::process::ExitCode;
use upsolve::error::Error;
use upsolve::format::{parse_instance, parse_rational, write_lcp_instance, ParsedInstance};
use upsolve::generate::generate_sufficient_instance;
use upsolve::qp::map_solution_back;
use upsolve::report::{emit_plot_data, write_partition, write_qp_solution};
use upsolve::solver::{solve_uplcp, SolveResult, SolverOptions};

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Kind {
    Lcp,
    Qp,
    Lp,
}

impl Kind {
    fn name(self) -> &'static str {
        match self {
            Kind::Lcp => "lcp",
            Kind::Qp => "qp",
            Kind::Lp => "lp",
        }
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "upsolve",
    about = "Partition the parameter interval of a uni-parametric LCP/QP/LP into invariancy intervals with exact rational-function solutions"
)]
struct Cli {
    #[command(subcommand)]
    command: Option<Command>,

    /// Problem type; must match the instance file's `problem` line
    #[arg(long = "type", value_enum)]
    kind: Option<Kind>,

    /// Instance file to solve
    #[arg(long)]
    input: Option<PathBuf>,

    /// Write the solution here instead of stdout
    #[arg(long)]
    output: Option<PathBuf>,

    /// Output tolerance for decimals (rational or decimal literal, e.g. 1e-9)
    #[arg(long)]
    tol: Option<String>,

    /// Worker threads for the interval queue
    #[arg(long)]
    threads: Option<usize>,

    /// Criss-cross pivot budget per probe
    #[arg(long = "pivot-limit")]
    pivot_limit: Option<u64>,

    /// Cap on processed subintervals (default 64·h)
    #[arg(long = "interval-budget")]
    interval_budget: Option<u64>,

    /// Also write plot data (CSV: theta,variable,value) to this file
    #[arg(long)]
    plot: Option<PathBuf>,

    /// Samples per piece for plot data
    #[arg(long, default_value_t = 16)]
    samples: usize,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a random sufficient LCP instance on theta in [0, 1]
    Gen {
        /// Dimension of the instance
        #[arg(long)]
        h: usize,
        /// RNG seed; the same seed always yields the same instance
        #[arg(long)]
        seed: u64,
        /// Fraction of nonzero entries in the generating factors
        #[arg(long, default_value_t = 0.75)]
        density: f64,
        /// Output instance file
        #[arg(long)]
        out: PathBuf,
    },
}

fn exit_code_for(e: &Error) -> u8 {
    match e {
        Error::Parse { .. } | Error::Dimension(_) | Error::Io(_) => 2,
        Error::Sufficiency(_) | Error::Feasibility(_) => 3,
        Error::Internal(_) => 4,
    }
}

fn usage_error(msg: &str) -> Error {
    Error::Parse {
        line: 0,
        msg: msg.to_string(),
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    if let Some(Command::Gen {
        h,
        seed,
        density,
        out,
    }) = cli.command
    {
        if h == 0 {
            return Err(usage_error("--h must be at least 1"));
        }
        if !(density > 0.0 && density <= 1.0) {
            return Err(usage_error("--density must lie in (0, 1]"));
        }
        let inst = generate_sufficient_instance(h, density, seed);
        std::fs::write(&out, write_lcp_instance(&inst))?;
        return Ok(());
    }

    let input = cli
        .input
        .as_ref()
        .ok_or_else(|| usage_error("--input FILE is required (or use the `gen` subcommand)"))?;
    let text = std::fs::read_to_string(input)?;
    let parsed = parse_instance(&text)?;
    if let Some(kind) = cli.kind {
        if kind.name() != parsed.kind() {
            return Err(usage_error(&format!(
                "--type {} does not match the instance file, which declares '{}'",
                kind.name(),
                parsed.kind()
            )));
        }
    }

    let mut opts = SolverOptions::default();
    if let Some(threads) = cli.threads {
        if threads == 0 {
            return Err(usage_error("--threads must be at least 1"));
        }
        opts.workers = threads;
    }
    if let Some(tol) = &cli.tol {
        let eps = parse_rational(tol)
            .filter(|e| e > &upsolve::poly::rat_int(0))
            .ok_or_else(|| usage_error("--tol must be a positive rational or decimal"))?;
        opts.eps = eps;
    }
    if cli.pivot_limit == Some(0) {
        return Err(usage_error("--pivot-limit must be at least 1"));
    }
    opts.pivot_limit = cli.pivot_limit;
    opts.interval_budget = cli.interval_budget;

    let (result, report): (SolveResult, String) = match &parsed {
        ParsedInstance::Lcp(inst) => {
            let result = solve_uplcp(inst, &opts)?;
            let report = write_partition(&result.partition, &opts.eps);
            (result, report)
        }
        ParsedInstance::Qp(qp) | ParsedInstance::Lp(qp) => {
            let (inst, map) = match &parsed {
                ParsedInstance::Lp(_) => upsolve::qp::lp_to_lcp(qp)?,
                _ => {
                    upsolve::qp::convexity_diagnostic(qp);
                    upsolve::qp::qp_to_lcp(qp)?
                }
            };
            let result = solve_uplcp(&inst, &opts)?;
            let pieces = map_solution_back(&result.partition, &map)?;
            let report = write_qp_solution(&pieces, &opts.eps);
            (result, report)
        }
    };

    match &cli.output {
        Some(path) => std::fs::write(path, &report)?,
        None => print!("{report}"),
    }

    if let Some(plot) = &cli.plot {
        if cli.samples < 2 {
            return Err(usage_error("--samples must be at least 2"));
        }
        std::fs::write(plot, emit_plot_data(&result.partition, cli.samples, &opts.eps))?;
    }

    log::info!(
        "{} pieces, {} intervals processed, {} criss-cross pivots",
        result.partition.len(),
        result.stats.intervals_processed,
        result.stats.criss_cross_pivots
    );
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}
