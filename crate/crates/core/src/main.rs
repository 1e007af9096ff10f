use std::process::ExitCode;

use clap::Parser;
use tripodsim::shell::cli::{execute, Cli};

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("tripodsim: {e}");
            ExitCode::from(2)
        }
    }
}
