//! `gram-moments` command-line front end.

mod args;
mod commands;
mod error;
mod figures;
mod input;
mod table;

use args::{Cli, Command, Format};
use clap::error::ErrorKind;
use clap::Parser;
use error::CliError;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}

fn emit(text: &str, out: Option<&PathBuf>) -> Result<(), CliError> {
    match out {
        Some(path) => write_file(path, text).inspect_err(|_| {
            let _ = std::fs::remove_file(path);
        }),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::io(Path::new("<stdout>"), e)),
    }
}

/// Computes every requested figure first, then writes them; a failed write
/// removes the files already written by this run.
fn run_figures(a: &args::FiguresArgs) -> Result<(), CliError> {
    let which: Vec<u8> = if a.which.is_empty() {
        (1..=6).collect()
    } else {
        a.which.clone()
    };
    let tables = which
        .iter()
        .map(|&k| figures::figure(k, a.trials, a.seed))
        .collect::<Result<Vec<_>, _>>()?;
    std::fs::create_dir_all(&a.out).map_err(|e| CliError::io(&a.out, e))?;
    let ext = match a.format {
        Format::Csv => "csv",
        Format::Json => "json",
    };
    let mut written = Vec::new();
    for (k, table) in which.iter().zip(&tables) {
        let path = a.out.join(format!("fig{k}.{ext}"));
        if let Err(e) = write_file(&path, &table.render(a.format)) {
            for p in written.iter().chain([&path]) {
                let _ = std::fs::remove_file(p);
            }
            return Err(e);
        }
        written.push(path);
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    let (table, output) = match &cli.command {
        Command::Moments(a) => (commands::moments(a)?, &a.output),
        Command::Asymptotic(a) => (commands::asymptotic(a)?, &a.output),
        Command::Mc(a) => (commands::mc(a)?, &a.output),
        Command::Blue(a) => (commands::blue(a)?, &a.output),
        Command::Lmmse(a) => (commands::lmmse(a)?, &a.app.output),
        Command::Scm(a) => (commands::scm(a)?, &a.output),
        Command::Figures(a) => return run_figures(a),
    };
    emit(&table.render(output.format), output.out.as_ref())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            e.exit()
        }
        Err(e) => {
            let err = CliError::Input(e.to_string().trim_end().to_string());
            eprintln!("{}", err.to_json());
            return ExitCode::from(err.exit_code() as u8);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
