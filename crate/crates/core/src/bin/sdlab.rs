use std::io;
use std::process::ExitCode;

use sdlab::cli::{self, CliError};

fn main() -> ExitCode {
    let config = match cli::parse_args(std::env::args_os()) {
        Ok(c) => c,
        Err(CliError::Help(text)) => {
            print!("{text}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprintln!("sdlab: {e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    let code = cli::run(&config, &mut io::stdout().lock(), &mut io::stderr());
    ExitCode::from(code as u8)
}
