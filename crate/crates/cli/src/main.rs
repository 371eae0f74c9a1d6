//! `custom2vec`: synthesize data, build graphs, train embeddings, evaluate
//! link recommendations and analyze similarity distributions.

mod commands;
mod config;

use std::process::ExitCode;

use clap::{CommandFactory, Parser};

use custom2vec_core::ErrorCategory;

use crate::commands::Cli;
use crate::config::UsageError;

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.downcast_ref::<UsageError>().is_some() {
            return 1;
        }
        if let Some(e) = cause.downcast_ref::<custom2vec_core::Error>() {
            return match e.category() {
                ErrorCategory::Config => 1,
                ErrorCategory::Data => 2,
                ErrorCategory::Internal => 3,
            };
        }
        if cause.downcast_ref::<std::io::Error>().is_some() {
            return 2;
        }
    }
    3
}

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().collect();
    let args = match config::merge_config(&Cli::command(), args) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(exit_code(&e));
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
