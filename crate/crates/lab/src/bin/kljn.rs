use std::process::ExitCode;

use clap::Parser;
use kljn_lab::cli::{run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("kljn: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
