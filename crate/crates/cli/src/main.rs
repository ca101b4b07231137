use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use gda_cli::args::Cli;
use gda_cli::output::{command_line, header, print_all, write_all};
use gda_cli::{execute, settings};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let argv: Vec<String> = std::env::args().collect();
    match real_main(&cli, &argv) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn real_main(cli: &Cli, argv: &[String]) -> anyhow::Result<ExitCode> {
    let opts = settings::resolve(cli.command.opts())?;
    let outcome = execute(&cli.command, &opts)?;
    let head = header(
        &command_line(argv),
        opts.seed.unwrap_or(0),
        &outcome.header_extra,
    );
    let dir = opts
        .out
        .clone()
        .or_else(|| outcome.default_dir.map(PathBuf::from));
    match dir {
        Some(dir) => {
            for path in write_all(&dir, &head, &outcome.files)? {
                eprintln!("wrote {}", path.display());
            }
        }
        None => print_all(&head, &outcome.files),
    }
    Ok(match outcome.passed {
        Some(false) => ExitCode::from(1),
        _ => ExitCode::SUCCESS,
    })
}
