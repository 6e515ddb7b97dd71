use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    let cli = capgap::cli::Cli::parse();
    match capgap::commands::run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(capgap::exit_code(&e))
        }
    }
}
