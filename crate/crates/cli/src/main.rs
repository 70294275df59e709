mod args;
mod commands;
mod config;

use std::process::ExitCode;

use args::Command;
use config::ParseFailure;
use demandcast_core::Error;

fn exit_code(e: &Error) -> u8 {
    if e.is_data_error() {
        3
    } else {
        2
    }
}

fn main() -> ExitCode {
    let cli = match config::parse(std::env::args_os().collect()) {
        Ok(cli) => cli,
        Err(ParseFailure::Usage(e)) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
        Err(ParseFailure::Config(e)) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let result = match cli.command {
        Command::Preprocess(a) => commands::preprocess(a),
        Command::Crossval(a) => commands::crossval(a),
        Command::Forecast(a) => commands::forecast(a),
        Command::Synth(a) => commands::synth(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
