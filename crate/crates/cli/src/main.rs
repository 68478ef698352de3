//! `kwidth`: command-line driver for the approximants, decay sweeps,
//! spectra and entropy bounds of `kwidth-core`.
//!
//! ```text
//! $ kwidth hsnorm --alpha 0.5
//! $ kwidth example --n 2 --out results
//! $ kwidth sweep --alpha 0.5 --p 4 --n-min 2 --n-max 8 --out results
//! $ kwidth spectrum --alpha 0.5 --N 512 --format json
//! $ kwidth entropy --kappa 0.25 --n-max 1e6
//! ```
//!
//! Exit codes: 0 on success, 2 for invalid configuration, 3 for numerical
//! failure, 4 when the decay regime is invalid.

mod args;
mod commands;
mod error;
mod output;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let (result, out) = match &cli.command {
        Command::Hsnorm(a) => (commands::hsnorm(a), &a.output),
        Command::Example(a) => (commands::example(a), &a.output),
        Command::Sweep(a) => (commands::sweep(a), &a.output),
        Command::Spectrum(a) => (commands::spectrum(a), &a.output),
        Command::Entropy(a) => (commands::entropy(a), &a.output),
    };
    match result.and_then(|artifacts| output::emit(&artifacts, out)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
