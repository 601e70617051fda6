//! `acdc` command-line front end.

mod args;
mod commands;
mod output;

use std::process::ExitCode;

use acdc_core::AcdcError;
use clap::Parser;

use crate::args::{Cli, Command};

/// Exit codes; clap itself exits with 2 on usage errors.
const EXIT_OTHER: u8 = 1;
const EXIT_IO: u8 = 3;
const EXIT_DATA: u8 = 4;
const EXIT_MODEL: u8 = 5;

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<AcdcError>() {
            return match e {
                AcdcError::Io { .. } => EXIT_IO,
                AcdcError::ModelVersion { .. } | AcdcError::MalformedModel(_) => EXIT_MODEL,
                _ => EXIT_DATA,
            };
        }
        if cause.downcast_ref::<std::io::Error>().is_some() {
            return EXIT_IO;
        }
    }
    EXIT_OTHER
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Train(a) => commands::train(&a),
        Command::Score(a) => commands::score(&a),
        Command::Eval(a) => commands::eval(&a),
        Command::Inspect(a) => commands::inspect(&a),
        Command::Synth(a) => commands::synth(&a),
        Command::Tree(a) => commands::tree(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
