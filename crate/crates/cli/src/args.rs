//! Flags, the optional JSON config file, and their merge.

use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};
use serde::{Deserialize, Deserializer};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    /// Print the nodes of a rule.
    Nodes,
    /// Compare a rule with `lambda^{-alpha}` at given points.
    Scalar,
    /// Apply a rule to a matrix or the built-in diagonal operator.
    Operator,
    /// Print an a-priori error estimate.
    Estimate,
    /// Write the data behind one of the four figures.
    Figure,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TransformArg {
    Se,
    De,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverArg {
    Diag,
    Dense,
    Cg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KindArg {
    Se,
    Ere,
    Ere2,
    Fest,
}

/// Fractional powers `L^{-alpha} g` by exponentially convergent quadrature.
///
/// Every option may also be given in a JSON file passed with `--config`,
/// using the flag names as keys; flags take precedence.
#[derive(Debug, Clone, Parser)]
#[command(name = "fracpow", version)]
pub struct Cli {
    #[arg(value_enum)]
    pub command: Command,

    #[command(flatten)]
    pub options: Options,

    /// JSON file with default values for the options above.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, PartialEq, clap::Args, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct Options {
    #[arg(long, value_enum)]
    pub transform: Option<TransformArg>,

    /// Fractional order, `0 < alpha < 1`.
    #[arg(long)]
    pub alpha: Option<f64>,

    /// Node parameter; a comma-separated list for `scalar`.
    #[arg(long, value_delimiter = ',')]
    #[serde(default, deserialize_with = "one_or_many")]
    pub n: Vec<usize>,

    /// Step size; replaces `--n` for SE and the step rule for DE.
    #[arg(long)]
    pub h: Option<f64>,

    /// Strip half-width.
    #[arg(long)]
    pub d: Option<f64>,

    /// Strip half-width `pi / K`.
    #[arg(long = "d-pi-over", value_name = "K")]
    #[serde(alias = "d_pi_over")]
    pub d_pi_over: Option<u32>,

    /// DE shift parameter; `tau*` when omitted.
    #[arg(long)]
    pub tau: Option<f64>,

    /// Safety factor on the pole distance [default: 0.95].
    #[arg(long)]
    pub r: Option<f64>,

    /// Spectral points, comma-separated.
    #[arg(long, value_delimiter = ',')]
    #[serde(default, deserialize_with = "one_or_many")]
    pub lambda: Vec<f64>,

    /// Matrix Market file.
    #[arg(long, value_name = "PATH")]
    pub matrix: Option<PathBuf>,

    /// Right-hand side, whitespace-separated values; all ones when omitted.
    #[arg(long, value_name = "PATH")]
    pub vector: Option<PathBuf>,

    /// Use `diag(1, 2, ..., 100)^8` as the operator.
    #[arg(long)]
    #[serde(default)]
    pub artificial: bool,

    /// Certificate `m <= lambda_min`; operators with `m < 1` are rescaled.
    #[arg(long)]
    #[serde(alias = "spectrum_lower_bound")]
    pub spectrum_lower_bound: Option<f64>,

    #[arg(long, value_enum)]
    pub solver: Option<SolverArg>,

    /// CG relative residual; `min(1e-12, 0.01 * estimate)` when omitted.
    #[arg(long)]
    #[serde(alias = "cg_tol")]
    pub cg_tol: Option<f64>,

    /// Output file; for `operator` this receives the result vector.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,

    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=4))]
    pub figure: Option<u8>,

    #[arg(long, value_enum)]
    pub kind: Option<KindArg>,

    /// Report the exact sup error (diagonal operators only).
    #[arg(long)]
    #[serde(default, alias = "diag_exact")]
    pub diag_exact: bool,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

fn one_or_many<'de, D, T>(deserializer: D) -> Result<Vec<T>, D::Error>
where
    D: Deserializer<'de>,
    T: Deserialize<'de>,
{
    Ok(match OneOrMany::deserialize(deserializer)? {
        OneOrMany::One(v) => vec![v],
        OneOrMany::Many(v) => v,
    })
}

impl Options {
    /// Flags first, file values where a flag is absent.
    pub fn or(self, file: Options) -> Options {
        Options {
            transform: self.transform.or(file.transform),
            alpha: self.alpha.or(file.alpha),
            n: if self.n.is_empty() { file.n } else { self.n },
            h: self.h.or(file.h),
            d: self.d.or(file.d),
            d_pi_over: self.d_pi_over.or(file.d_pi_over),
            tau: self.tau.or(file.tau),
            r: self.r.or(file.r),
            lambda: if self.lambda.is_empty() {
                file.lambda
            } else {
                self.lambda
            },
            matrix: self.matrix.or(file.matrix),
            vector: self.vector.or(file.vector),
            artificial: self.artificial || file.artificial,
            spectrum_lower_bound: self.spectrum_lower_bound.or(file.spectrum_lower_bound),
            solver: self.solver.or(file.solver),
            cg_tol: self.cg_tol.or(file.cg_tol),
            out: self.out.or(file.out),
            figure: self.figure.or(file.figure),
            kind: self.kind.or(file.kind),
            diag_exact: self.diag_exact || file.diag_exact,
        }
    }
}

pub fn read_config(path: &Path) -> Result<Options, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

impl Cli {
    /// Options after merging in the config file, if any.
    pub fn resolved(&self) -> Result<Options, CliError> {
        match &self.config {
            Some(path) => Ok(self.options.clone().or(read_config(path)?)),
            None => Ok(self.options.clone()),
        }
    }
}
