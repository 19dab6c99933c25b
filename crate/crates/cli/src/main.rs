mod args;
mod commands;
mod plot;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};
use commands::CliError;

fn run(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Construct(a) => commands::construct(a),
        Command::Encode(a) => commands::encode_cmd(a),
        Command::Decode(a) => commands::decode_cmd(a),
        Command::Simulate(a) => commands::simulate(a),
        Command::Plot(a) => commands::plot_cmd(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("polarium: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
