use std::fmt;

/// Errors produced while building rules, selecting parameters or applying
/// a rule to an operator.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FracpowError {
    /// A parameter lies outside its mathematical domain.
    #[error("parameter `{name}` = {value} is outside its domain: {expected}")]
    Domain {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },

    /// The DE step rule needs `n >= mu*e/(4d)`.
    #[error("n = {n} is below the admissible minimum {min_n} for the DE step rule (d = {d})")]
    StepAdmissibility { n: usize, min_n: usize, d: f64 },

    /// The caller-supplied spectrum certificate does not guarantee `sigma(L) >= 1`.
    #[error("spectrum lower bound {bound} < 1; rescale the operator (see `scaled_fracpow`) before applying a rule")]
    SpectrumBound { bound: f64 },

    /// Right-hand side and operator sizes differ.
    #[error("dimension mismatch: operator has dimension {expected}, vector has {found}")]
    DimensionMismatch { expected: usize, found: usize },

    /// The matrix is not symmetric to the required relative tolerance.
    #[error("matrix is not symmetric: entry ({row}, {col}) differs from its transpose by {defect:e} (relative)")]
    NotSymmetric { row: usize, col: usize, defect: f64 },

    /// A shifted solve `(sI + L) x = v` failed.
    #[error("shifted solve failed for shift s = {shift:e}: {reason}")]
    Solve { shift: f64, reason: SolveFailure },

    /// Symmetric eigendecomposition used by the spectral oracle failed.
    #[error("spectral oracle failed: {0}")]
    Oracle(String),

    /// Malformed input file.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// Underlying I/O failure (stringified to keep the error `Clone`).
    #[error("I/O error: {0}")]
    Io(String),
}

impl From<std::io::Error> for FracpowError {
    fn from(err: std::io::Error) -> Self {
        FracpowError::Io(err.to_string())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SolveFailure {
    /// Cholesky factorization of `sI + L` broke down.
    Factorization,
    /// CG stopped before reaching the requested relative residual.
    NotConverged { iterations: usize, residual: f64 },
    /// Solution contains non-finite entries.
    NonFinite,
}

impl fmt::Display for SolveFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SolveFailure::Factorization => write!(f, "Cholesky factorization failed"),
            SolveFailure::NotConverged { iterations, residual } => write!(
                f,
                "CG did not converge after {iterations} iterations (relative residual {residual:e})"
            ),
            SolveFailure::NonFinite => write!(f, "non-finite entries in the solution"),
        }
    }
}

pub type Result<T> = std::result::Result<T, FracpowError>;

pub(crate) fn domain(name: &'static str, value: f64, expected: &'static str) -> FracpowError {
    FracpowError::Domain { name, value, expected }
}
