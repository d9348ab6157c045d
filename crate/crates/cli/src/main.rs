use std::process::ExitCode;

use clap::Parser;
use weakdwell_cli::{run, Args};

fn main() -> ExitCode {
    let args = Args::parse();
    match args.into_config().and_then(|c| run(&c)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("weakdwell: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
