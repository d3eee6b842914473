use std::process::ExitCode;

use sparselb_cli::{parse_config, run, CliError};

fn main() -> ExitCode {
    let result = parse_config(std::env::args_os()).and_then(|cfg| run(&cfg));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(e)) => {
            let _ = e.print();
            ExitCode::from(e.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("sparselb: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
