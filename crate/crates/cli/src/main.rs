//! `spectra` command-line front end.
//!
//! Exit status: 0 success, 1 usage, 2 numerical-quality rejection,
//! 3 validation failure.

mod args;
mod commands;
mod svg;

use args::{splice_config, Cli, Command};
use clap::Parser;
use commands::{UsageError, ValidationFailed};
use std::process::ExitCode;

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<ValidationFailed>().is_some() {
        return 3;
    }
    if err.downcast_ref::<UsageError>().is_some() {
        return 1;
    }
    match err.downcast_ref::<spectra::Error>() {
        Some(e) if e.is_numerical() => 2,
        _ => 1,
    }
}

fn init_threads(n: usize) -> anyhow::Result<()> {
    if n == 0 {
        return Err(UsageError("--threads must be at least 1".into()).into());
    }
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    #[cfg(not(feature = "parallel"))]
    if n > 1 {
        log::warn!("built without the parallel feature; --threads {n} ignored");
    }
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let o = cli.command.opts();
    init_threads(o.threads)?;
    log::debug!("{} {:?}", cli.command.name(), o);
    match &cli.command {
        Command::Solve(o) => commands::solve(o),
        Command::Sweep(o) => commands::sweep(o),
        Command::Compare(o) => commands::compare(o),
        Command::Bounds(o) => commands::bounds(o),
        Command::Validate(o) => commands::validate(o),
    }
}

fn main() -> ExitCode {
    let argv = match splice_config(std::env::args_os().collect()) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(1);
        }
    };
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
