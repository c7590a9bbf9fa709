//! Command-line front end: config resolution, the four experiment commands,
//! CSV artifacts and run manifests.

pub mod args;
pub mod commands;
pub mod output;

use std::path::PathBuf;

use anyhow::Result;

use crate::args::{resolve_config, Cli, InvalidInput};
use crate::commands::Report;

#[derive(Debug)]
pub struct Outcome {
    pub report: Report,
    pub written: Vec<PathBuf>,
}

/// Resolves the config, runs the command on the requested number of
/// workers and writes its artifacts.
pub fn run(cli: &Cli) -> Result<Outcome> {
    let cfg = resolve_config(&cli.common, &cli.command)?;
    let report = match cli.common.workers {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| InvalidInput(format!("workers: {e}")))?;
            pool.install(|| commands::execute(&cli.command, &cfg))?
        }
        None => commands::execute(&cli.command, &cfg)?,
    };
    let written = output::write_report(&report, &cfg)?;
    Ok(Outcome { report, written })
}

/// Exit status for a failed run: 2 for rejected input, 1 otherwise.
pub fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<InvalidInput>().is_some() {
        2
    } else {
        1
    }
}
