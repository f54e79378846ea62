use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use mixspec::{cmd_solve, cmd_sweep, cmd_verify, Options};

/// Eigenvalue laboratory for superpositions of fractional Laplacians.
#[derive(Parser)]
#[command(name = "mixspec", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Smallest eigenpairs of one configured problem.
    Solve(Common),
    /// Run checks and write one report per check.
    Verify(VerifyArgs),
    /// Solve along a parameter axis and write a CSV table.
    Sweep(Common),
}

#[derive(Args)]
struct Common {
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory (MIXSPEC_OUT takes precedence).
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    common: Common,
    /// Run every check (the built-in presets without --config).
    #[arg(long, conflicts_with = "only")]
    all: bool,
    /// Run only the check with this name or kind.
    #[arg(long, value_name = "NAME")]
    only: Option<String>,
}

fn options(c: Common) -> Options {
    Options {
        config: c.config,
        out: c.out,
        seed: c.seed,
        threads: c.threads,
        ..Options::default()
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Solve(c) => cmd_solve(&options(c)),
        Command::Sweep(c) => cmd_sweep(&options(c)),
        Command::Verify(v) => cmd_verify(&Options {
            all: v.all,
            only: v.only,
            ..options(v.common)
        }),
    };
    ExitCode::from(code as u8)
}
