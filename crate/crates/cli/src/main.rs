use std::io::Write;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use nambu_cli::commands::{self, AllArgs, BracketsArgs, IdentitiesArgs, QuantizeArgs, ReportArgs, VerifyArgs};
use nambu_cli::Status;

/// Berezin-Toeplitz quantization of flat tori: identity checks and
/// convergence-rate verification of Nambu-bracket asymptotics.
#[derive(Parser)]
#[command(name = "nambu", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact generalized-commutator and tensor identities on random matrices.
    Identities(IdentitiesArgs),
    /// Exact classical bracket identities on random trigonometric polynomials.
    Brackets(BracketsArgs),
    /// Dump one Toeplitz matrix.
    Quantize(QuantizeArgs),
    /// Residual sweeps with rate fits, CSV and SVG output.
    Verify(VerifyArgs),
    /// Rebuild plots and summary from a previous run's CSV.
    Report(ReportArgs),
    /// Identities, brackets and a full verification run.
    All(AllArgs),
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { Status::Usage.code() as u8 } else { 0 });
        }
    };
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    let mut log = std::io::stderr();
    let result = match &cli.command {
        Command::Identities(a) => commands::identities(a, &mut out),
        Command::Brackets(a) => commands::brackets(a, &mut out),
        Command::Quantize(a) => commands::quantize(a, &mut out, &mut log),
        Command::Verify(a) => commands::verify(a, &mut out, &mut log),
        Command::Report(a) => commands::report(a, &mut out),
        Command::All(a) => commands::all(a, &mut out, &mut log),
    };
    let _ = out.flush();
    let status = result.unwrap_or_else(|e| {
        eprintln!("error: {e}");
        Status::of_error(&e)
    });
    ExitCode::from(status.code() as u8)
}
