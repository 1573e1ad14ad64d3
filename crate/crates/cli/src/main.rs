use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    ExitCode::from(mtypes_cli::run(mtypes_cli::Cli::parse()))
}
