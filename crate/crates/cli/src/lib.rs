//! Batch front-end for `isothc`: JSON-configured subcommands that write
//! CSV/JSON artifacts and a run manifest.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod args;
pub mod commands;
pub mod config;
pub mod error;
pub mod fit;
pub mod output;

pub use error::{CliError, CliResult};

use args::{Cli, Command};

pub fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Factorize(a) => commands::factorize::run(&a.resolve()?).map(drop),
        Command::Simulate(a) => commands::simulate::run(&a.resolve()?).map(drop),
        Command::Estimate(a) => commands::estimate::run(&a.resolve()?).map(drop),
        Command::Fit(a) => commands::fit::run(&a.resolve()?).map(drop),
    }
}
