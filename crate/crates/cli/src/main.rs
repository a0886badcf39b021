use std::io;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use greenfut_cli::{execute, Cli};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let _ = err.print();
            return match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                // Usage mistakes are configuration errors; 2 is reserved for programs.
                _ => ExitCode::from(3),
            };
        }
    };
    let stdout = io::stdout();
    match execute(cli, &mut stdout.lock()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("greenfut: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}
