use std::process::ExitCode;

use clap::Parser;
use xplab::{Cli, EXIT_CONFIG_ERROR, EXIT_OK, EXIT_SUITE_FAILURE};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match xplab::run(cli) {
        Ok(true) => ExitCode::from(EXIT_OK),
        Ok(false) => ExitCode::from(EXIT_SUITE_FAILURE),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_CONFIG_ERROR)
        }
    }
}
