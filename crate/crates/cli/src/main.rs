use std::process::ExitCode;

use clap::Parser;
use qnt_runner::{run, Cli, MAX_DIM_ENV};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli, std::env::var(MAX_DIM_ENV).ok().as_deref()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("qnt: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
