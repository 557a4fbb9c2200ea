//! `cyclovan`: periods, unit indices, class numbers and vanishing certificates
//! from the command line. Every run writes one JSON report to stdout.

mod commands;
mod report;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use cyclovan::ff_arith::DEFAULT_FIELD_CAP;

#[derive(Debug, Parser)]
#[command(name = "cyclovan", version, about = "Gaussian periods, cyclotomic unit indices and eigenspace certificates")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Emit the JSON report (always on; accepted for scripts that pass it).
    #[arg(long, global = true)]
    pub json: bool,

    /// Suppress the summary on stderr.
    #[arg(long, global = true)]
    pub quiet: bool,

    /// Include wall-clock time in the report (breaks byte-identical output).
    #[arg(long, global = true)]
    pub timing: bool,
}

#[derive(Debug, Clone, Args)]
pub struct FieldArgs {
    #[arg(long)]
    pub p: u64,
    #[arg(long)]
    pub q: u64,
    /// Primitive root modulo p (default: the least one).
    #[arg(long)]
    pub g: Option<u64>,
    #[arg(long, default_value_t = DEFAULT_FIELD_CAP)]
    pub field_cap: u64,
}

#[derive(Debug, Clone, Args)]
pub struct SearchArgs {
    /// Largest witness prime tried.
    #[arg(long, default_value_t = 1000)]
    pub max_q: u64,
    #[arg(long, default_value_t = 5)]
    pub max_witnesses: usize,
    #[arg(long, default_value_t = DEFAULT_FIELD_CAP)]
    pub field_cap: u64,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Canonical field F_{q^n} with its modulus, alpha and zeta.
    Setup(FieldArgs),
    /// Gaussian periods and the numbers v, d_i, a_k.
    Periods {
        #[command(flatten)]
        field: FieldArgs,
        /// Include the count vectors of every period.
        #[arg(long)]
        full: bool,
    },
    /// Index of beta_r modulo the canonical prime above q (all even r if --r is absent).
    Indices {
        #[command(flatten)]
        field: FieldArgs,
        #[arg(long)]
        r: Option<u64>,
    },
    /// Quadratic identity and index congruences for one pair (p, q).
    Identity(FieldArgs),
    /// Certificate for the (p+1)/2 eigenspace, p = 3 mod 4.
    Certify {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        g: Option<u64>,
        #[command(flatten)]
        search: SearchArgs,
    },
    /// Index scan over every even eigenspace.
    Vandiver {
        #[arg(long)]
        p: u64,
        #[command(flatten)]
        search: SearchArgs,
    },
    /// Class number of Q(sqrt(-p)) by residue sums and by reduced forms.
    Classnum {
        #[arg(long)]
        p: u64,
    },
    /// Solve x^2 + D y^2 = N for prime N.
    Cornacchia {
        #[arg(long)]
        d: u64,
        #[arg(long)]
        n: u64,
    },
    /// All C^2 + p D^2 = 4 q^h and the congruence C = 2 (-q)^{-R} mod p.
    Stickelberger {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        q: u64,
    },
    /// Share of primes up to a bound represented by x^2 + D y^2.
    Density {
        #[arg(long)]
        d: u64,
        #[arg(long, default_value_t = 1_000_000)]
        bound: u64,
    },
    /// Identity data for e = 4 or e = 6.
    Explore {
        #[arg(long)]
        p: u64,
        /// e4 or e6
        #[arg(long = "case")]
        which: String,
        #[arg(long, default_value_t = 1000)]
        max_q: u64,
        #[arg(long, default_value_t = DEFAULT_FIELD_CAP)]
        field_cap: u64,
    },
    /// Re-check a certificate JSON file ("-" for stdin).
    Verify {
        #[arg(long)]
        input: String,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = if err.use_stderr() { 1 } else { 0 };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    let started = std::time::Instant::now();
    let (mut report, outcome) = commands::run(&cli.command);
    if cli.timing {
        report.timing_ms = Some(started.elapsed().as_millis() as u64);
    }
    if !cli.quiet {
        eprintln!("{}", report.summary);
    }
    println!("{}", report.to_json());
    ExitCode::from(outcome.code())
}
