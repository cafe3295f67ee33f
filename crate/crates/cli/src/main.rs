//! `stardisc` command-line tool.

mod args;
mod commands;
mod output;

use std::process::ExitCode;

use clap::Parser;

use crate::args::{Cli, Command};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    let result = match &cli.command {
        Command::Generate(a) => commands::generate_cmd(a),
        Command::Evaluate(a) => commands::evaluate_cmd(a),
        Command::Optimize(a) => commands::optimize_cmd(a),
        Command::Inverse(a) => commands::inverse_cmd(a),
        Command::Baseline(a) => commands::baseline_cmd(a),
        Command::Replay(a) => commands::replay_cmd(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
