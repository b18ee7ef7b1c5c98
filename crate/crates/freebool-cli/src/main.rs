use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use freebool_cli::{Failure, Format, Job};

#[derive(Parser)]
#[command(name = "freebool", version, about = "Distributions and conditional expectations of polynomials in free variables")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Print the linearization pencil of the expression.
    Linearize(Common),
    /// Moment series from the fixed-point solver.
    Moments(Common),
    /// Conditional expectation onto the retained variables.
    Condexp(Common),
    /// Residual order of each algebraic equation in the job.
    Checkeq {
        #[command(flatten)]
        common: Common,
        /// Exit with status 4 if some residual does not vanish.
        #[arg(long)]
        assert: bool,
    },
    /// Brute-force moments straight from the cumulant definitions.
    Oracle(Common),
    /// Random-matrix estimate of the moments (and spectrum histogram as CSV).
    Rmt(Common),
}

#[derive(clap::Args)]
struct Common {
    /// Job file (JSON).
    job: PathBuf,
    /// Truncation order (powers of z; powers of s for rational expressions).
    #[arg(long)]
    order: Option<usize>,
    /// Comma-separated retained variables for conditional expectations.
    #[arg(long)]
    retain: Option<String>,
    /// Seed for random-matrix sampling.
    #[arg(long)]
    seed: Option<u64>,
    /// Longest retained word in expansions.
    #[arg(long)]
    max_len: Option<usize>,
    /// Write here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Fmt::Json)]
    format: Fmt,
}

#[derive(Clone, Copy, ValueEnum)]
enum Fmt {
    Json,
    Csv,
}

fn load(c: &Common) -> Result<Job, Failure> {
    let mut job = Job::from_file(&c.job)?;
    if let Some(k) = c.order {
        job.order = k;
        job.oracle_order = k;
    }
    if let Some(r) = &c.retain {
        job.set_retain(r)?;
    }
    if let Some(l) = c.max_len {
        job.expand_len = l;
    }
    Ok(job)
}

fn run(cli: Cli) -> Result<(), Failure> {
    let mut residual = None;
    let (common, out) = match &cli.cmd {
        Cmd::Linearize(c) => (c, freebool_cli::cmd_linearize(&load(c)?)?),
        Cmd::Moments(c) => (c, freebool_cli::cmd_moments(&load(c)?)?),
        Cmd::Condexp(c) => (c, freebool_cli::cmd_condexp(&load(c)?)?),
        Cmd::Oracle(c) => (c, freebool_cli::cmd_oracle(&load(c)?)?),
        Cmd::Rmt(c) => (c, freebool_cli::cmd_rmt(&load(c)?, c.seed)?),
        Cmd::Checkeq { common, assert } => {
            let (out, ok) = freebool_cli::cmd_checkeq(&load(common)?)?;
            if *assert && !ok {
                residual = Some(Failure::Residual(format!("{}", common.job.display())));
            }
            (common, out)
        }
    };
    let fmt = match common.format {
        Fmt::Json => Format::Json,
        Fmt::Csv => Format::Csv,
    };
    let text = out.render(fmt)?;
    let job_out = if common.out.is_none() { Job::from_file(&common.job)?.out } else { None };
    match common.out.as_ref().or(job_out.as_ref()) {
        Some(p) => std::fs::write(p, text).map_err(|e| Failure::Schema(format!("{}: {e}", p.display())))?,
        None => print!("{text}"),
    }
    residual.map_or(Ok(()), Err)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
