//! Experiment driver behind the `gda` binary.

pub mod args;
pub mod commands;
pub mod experiments;
pub mod output;
pub mod settings;

use anyhow::Result;

use args::Command;
use commands::Outcome;

/// Runs a subcommand on already-merged options.
pub fn execute(command: &Command, opts: &args::Opts) -> Result<Outcome> {
    match command {
        Command::Spectrum(_) => commands::spectrum(opts),
        Command::Tune(_) => commands::tune_cmd(opts),
        Command::Run(_) => commands::run_cmd(opts),
        Command::Check(_) => commands::check_cmd(opts),
        Command::Fig1(_) => commands::fig1(opts),
        Command::Fig2(_) => commands::fig2(opts),
        Command::Fig3Left(_) => commands::fig3_left(opts),
        Command::Fig3Right(_) => commands::fig3_right(opts),
    }
}
