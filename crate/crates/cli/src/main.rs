mod commands;

use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;

use commands::{Cli, Outcome};

/// Raised when writing an artifact fails; maps to exit code 3.
#[derive(Debug)]
pub struct IoFailure(pub std::io::Error, pub String);

impl std::fmt::Display for IoFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "cannot write {}: {}", self.1, self.0)
    }
}

impl std::error::Error for IoFailure {}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let start = Instant::now();
    let result = commands::run_with_workers(&cli);
    eprintln!("elapsed: {:.3}s", start.elapsed().as_secs_f64());
    match result {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::Violation(n)) => {
            eprintln!("{n} violation(s) reported");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<IoFailure>().is_some() {
                ExitCode::from(3)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
