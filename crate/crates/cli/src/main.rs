use std::process::ExitCode;

use clap::Parser;
use finegrain_cli::args::Cli;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match finegrain_cli::run(&cli, &mut std::io::stdout(), &mut std::io::stderr()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
