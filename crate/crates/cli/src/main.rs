//! `longmem`: Hurst, autocorrelation, Lyapunov and permutation diagnostics
//! for monthly climate indices.
//!
//! ```text
//! longmem stats  --input soi.txt
//! longmem suite  --input soi.txt --format json
//! longmem lyap   --input soi.txt --fit 0:4 --out s_curve.txt
//! longmem gen    --kind fgn --hurst 0.7 --n 2048 --seed 1 --out f.txt
//! ```
//!
//! Exit codes: 0 success, 2 usage or malformed input, 3 invalid input or
//! unreadable file, 4 numerical failure. Errors are printed to stderr as one
//! JSON object.

use std::io::Write;
use std::process::ExitCode;

use clap::Parser;

mod args;
mod commands;
mod error;
mod input;
mod report;

use args::Cli;
use error::{CliError, CliResult};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let argv: Vec<String> = std::env::args_os()
        .skip(1)
        .map(|a| a.to_string_lossy().into_owned())
        .collect();
    match run(&cli, &argv) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(cli: &Cli, argv: &[String]) -> CliResult<()> {
    let report = commands::run(cli)?;
    if let (Some(path), Some(curve)) = (&cli.out, &report.curve) {
        std::fs::write(path, curve).map_err(|e| CliError::io(path, e))?;
    }
    let text = report.render(cli.format, argv);
    let mut stdout = std::io::stdout().lock();
    // a closed pipe is not an error worth reporting
    let _ = stdout.write_all(text.as_bytes());
    Ok(())
}
