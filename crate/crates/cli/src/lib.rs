//! Front end of `hkverify`. Each command returns its process exit code.

pub mod args;
pub mod commands;
pub mod convergence;
pub mod error;
pub mod output;

use args::{Cli, Command};
use error::{CliError, CliResult};

pub fn run(cli: &Cli) -> CliResult<u8> {
    match &cli.command {
        Command::Gen(a) => commands::gen(a),
        Command::Verify(a) => commands::verify(a),
        Command::Flow(a) => commands::flow(a),
        Command::Convergence(a) => convergence::convergence(a),
    }
}

/// Caps the global thread pool at `HK_THREADS` when it is set.
pub fn configure_threads() -> CliResult<()> {
    let Ok(value) = std::env::var("HK_THREADS") else {
        return Ok(());
    };
    let threads = value
        .trim()
        .parse::<usize>()
        .ok()
        .filter(|t| *t > 0)
        .ok_or_else(|| {
            CliError::Usage(format!(
                "HK_THREADS must be a positive integer, got {value:?}"
            ))
        })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Usage(format!("thread pool: {e}")))
}
