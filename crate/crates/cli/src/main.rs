use std::process::ExitCode;

use clap::Parser;
use misaw::app::{run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    ExitCode::from(run(&cli))
}
