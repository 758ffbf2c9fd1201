//! `spectop`: experiment driver for the spectop core library.

mod args;
mod commands;
mod config;
mod error;
mod verify;
mod walks;

use std::process::ExitCode;

use clap::Parser;

use crate::args::{Cli, Command, VerifyCommand, WalksCommand};
use crate::error::{CliError, CliResult};

/// Worker thread count override.
const THREADS_VAR: &str = "SPECTOP_THREADS";

fn init_threads() -> CliResult<()> {
    let Ok(text) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let threads: usize = text
        .trim()
        .parse()
        .map_err(|_| CliError::Usage(format!("{THREADS_VAR} = `{text}` is not a thread count")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Usage(format!("{THREADS_VAR}: {e}")))
}

fn dispatch(cli: &Cli) -> CliResult<bool> {
    match &cli.command {
        Command::Gen(a) => commands::gen(a),
        Command::Spectrum(a) => commands::spectrum(a),
        Command::Net(a) => commands::net(a),
        Command::LocalNet(a) => commands::local_net_cmd(a),
        Command::Sweep(a) => commands::sweep(a),
        Command::Verify(v) => match v {
            VerifyCommand::RadDrop(a) => verify::rad_drop(a),
            VerifyCommand::LocalGlobal(a) => verify::local_global(a),
            VerifyCommand::Interlace(a) => verify::interlace(a),
            VerifyCommand::FiniteParam(a) => verify::finite_param(a),
            VerifyCommand::Thm(a) => verify::thm(a),
        },
        Command::Walks(w) => match w {
            WalksCommand::Tree(a) => walks::tree(a),
            WalksCommand::Finite(a) => walks::finite(a),
            WalksCommand::Fit(a) => walks::fit(a),
            WalksCommand::Roundtrip(a) => walks::roundtrip(a),
        },
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match init_threads().and_then(|()| dispatch(&cli)) {
        Ok(false) => ExitCode::SUCCESS,
        Ok(true) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
