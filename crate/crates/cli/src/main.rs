//! Experiment harness over the mechanism library: check dominance notions on
//! explicit game trees, build and account direct-revelation verification
//! mechanisms, run public-project revelation experiments, and exercise the
//! softmax mechanism with partial verification. All randomized subcommands
//! take a 64-bit seed (flag, `OSPLAB_SEED`, or 0) and produce byte-identical
//! output for identical configurations regardless of thread count.

mod check;
mod direct_cmd;
mod expmech_cmd;
mod fixtures_cmd;
mod out;
mod pubproj_cmd;

use clap::{Parser, Subcommand};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "osplab", version, about = "mechanism checking and verification experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a dominance notion for a mechanism file against valuations and
    /// signalling strategies.
    Check(check::CheckArgs),
    /// Build a direct-revelation verification mechanism and account its
    /// expected verified count.
    Direct(direct_cmd::DirectArgs),
    /// Sequential public-project experiments: verified-count statistics and
    /// exact stop-position combinatorics.
    Pubproj(pubproj_cmd::PubprojArgs),
    /// Softmax outcome selection with partial verification, with incentive
    /// and approximation checks.
    Expmech(expmech_cmd::ExpmechArgs),
    /// Write the bundled example files into a directory.
    Fixtures(fixtures_cmd::FixturesArgs),
}

/// Exit discipline: 0 = success, 1 = a checked property failed, 2 = usage or
/// input-file problems (clap's own parse errors also exit 2).
fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Check(args) => check::run(args),
        Command::Direct(args) => direct_cmd::run(args),
        Command::Pubproj(args) => pubproj_cmd::run(args),
        Command::Expmech(args) => expmech_cmd::run(args),
        Command::Fixtures(args) => fixtures_cmd::run(args),
    };
    match result {
        Ok(out::Outcome::Pass) => ExitCode::SUCCESS,
        Ok(out::Outcome::CheckFailed) => ExitCode::from(1),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}
