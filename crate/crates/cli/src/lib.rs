//! Command-line driver: rule nodes, scalar and operator runs, estimates and
//! the figure data, all written as CSV or `key=value` text.

pub mod args;
mod commands;

use std::path::Path;

use fracpow::FracpowError;

pub use args::{Cli, Command, Options};

/// Environment variable bounding the worker pool.
pub const THREADS_ENV: &str = "FRACPOW_THREADS";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Param(String),
    #[error("invalid config file {0}")]
    Config(String),
    #[error("I/O error: {0}")]
    Io(String),
    #[error(transparent)]
    Lib(#[from] FracpowError),
}

impl CliError {
    /// 2 parameters, 3 I/O and parsing, 4 solver, 5 non-symmetric matrix,
    /// 6 dimension mismatch.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Param(_) => 2,
            CliError::Config(_) | CliError::Io(_) => 3,
            CliError::Lib(e) => match e {
                FracpowError::Domain { .. }
                | FracpowError::StepAdmissibility { .. }
                | FracpowError::SpectrumBound { .. } => 2,
                FracpowError::Parse { .. } | FracpowError::Io(_) => 3,
                FracpowError::Solve { .. } | FracpowError::Oracle(_) => 4,
                FracpowError::NotSymmetric { .. } => 5,
                FracpowError::DimensionMismatch { .. } => 6,
            },
        }
    }
}

pub(crate) fn param(message: impl Into<String>) -> CliError {
    CliError::Param(message.into())
}

/// Shortest round-trip form, switching to exponent notation outside
/// `[1e-4, 1e16)`.
pub fn num(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || (1e-4..1e16).contains(&a) || !x.is_finite() {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

fn thread_pool() -> Result<rayon::ThreadPool, CliError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(value) = std::env::var(THREADS_ENV) {
        let threads: usize = value
            .trim()
            .parse()
            .ok()
            .filter(|&t| t > 0)
            .ok_or_else(|| param(format!("{THREADS_ENV} must be a positive integer, got '{value}'")))?;
        builder = builder.num_threads(threads);
    }
    builder
        .build()
        .map_err(|e| param(format!("cannot start worker pool: {e}")))
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

/// Runs one command and returns what belongs on stdout.
pub fn run(cli: &Cli) -> Result<String, CliError> {
    let opts = cli.resolved()?;
    let pool = thread_pool()?;
    let text = pool.install(|| match cli.command {
        Command::Nodes => commands::nodes(&opts),
        Command::Scalar => commands::scalar(&opts),
        Command::Operator => commands::operator(&opts),
        Command::Estimate => commands::estimate(&opts),
        Command::Figure => commands::figure(&opts),
    })?;
    match (&opts.out, cli.command) {
        (Some(path), command) if command != Command::Operator => {
            write_file(path, &text)?;
            Ok(String::new())
        }
        _ => Ok(text),
    }
}
