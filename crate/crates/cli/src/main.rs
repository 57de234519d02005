#![allow(clippy::result_large_err)]

mod args;
mod commands;
mod render;

use std::process::ExitCode;

use clap::Parser;
use ltumatch::fuzz::FuzzConfig;
use ltumatch::oracle::OracleCaps;

use args::{Cli, Command};
use commands::{CommandResult, Failure, FuzzArgs};

const EXIT_NEGATIVE: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_INTERNAL: u8 = 3;

fn dispatch(command: Command) -> CommandResult {
    match command {
        Command::Solve { problem, labels } => commands::solve(&problem, &labels),
        Command::Verify { problem, outcome } => commands::verify(&problem, &outcome),
        Command::ToGame { problem } => commands::to_game_cmd(&problem),
        Command::FromEq { problem, profile } => commands::from_eq(&problem, &profile),
        Command::CheckTu { problem } => commands::check_tu_cmd(&problem),
        Command::RescaleTu { problem } => commands::rescale_tu(&problem),
        Command::Exchange {
            problem,
            first,
            second,
        } => commands::exchange(&problem, &first, &second),
        Command::Counterexample { problem, quadruple } => {
            commands::counterexample(&problem, quadruple.as_deref())
        }
        Command::Oracle { problem, caps } => commands::oracle(&problem, &caps),
        Command::SolveM2o { problem, labels } => commands::solve_m2o(&problem, &labels),
        Command::VerifyM2o { problem, outcome } => commands::verify_m2o(&problem, &outcome),
        Command::Fuzz {
            seed,
            count,
            max_workers,
            max_jobs,
            budget,
            caps,
        } => commands::fuzz(&FuzzArgs {
            seed,
            count,
            config: FuzzConfig {
                max_workers,
                max_jobs,
                ..FuzzConfig::default()
            },
            budget,
            caps: OracleCaps {
                max_pairs: caps.max_pairs,
                max_types: caps.max_types,
            },
        }),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let (value, code) = match dispatch(cli.command) {
        Ok(value) => (Some(value), 0),
        Err(Failure::Negative(value)) => (Some(value), EXIT_NEGATIVE),
        Err(Failure::Breach(value)) => (Some(value), EXIT_INTERNAL),
        Err(Failure::Input(message)) => {
            eprintln!("error: {message}");
            (None, EXIT_INPUT)
        }
        Err(Failure::Internal(message)) => {
            eprintln!("internal error: {message}");
            (None, EXIT_INTERNAL)
        }
    };
    if let Some(value) = value {
        if let Err(err) = render::emit(&cli.display, &value) {
            eprintln!("error: cannot write output: {err}");
            return ExitCode::from(EXIT_INPUT);
        }
    }
    ExitCode::from(code)
}
