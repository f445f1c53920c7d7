//! Exponentially convergent quadrature for `L^{-alpha} g`, `0 < alpha < 1`,
//! where `L` is symmetric positive definite with spectrum in `[1, inf)`.
//!
//! A [`QuadratureRule`] is a list of resolvent terms `c_l / (s_l + lambda)`.
//! Applied to an operator each term costs one shifted solve
//! `(s_l I + L)^{-1} g`. Rules come from [`params`], a-priori error
//! predictions from [`estimates`], and solve backends from [`operator`].
//!
//! ```
//! use fracpow::{params, FractionalOrder};
//!
//! let order = FractionalOrder::new(0.5).unwrap();
//! let rule = params::de_config(60, order, params::DEFAULT_SAFETY).unwrap().rule().unwrap();
//! assert!((rule.eval(16.0) - 0.25).abs() < 1e-10);
//! ```

// `!(x > 0.0)` is used on purpose so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod estimates;
pub mod io;
pub mod kernel;
pub mod operator;
pub mod params;
mod sum;

pub use error::{FracpowError, Result, SolveFailure};
pub use kernel::{
    build_de_rule, build_se_rule, de_integrand, eval_rule, se_integrand, FractionalOrder, QuadratureRule,
    ResolventTerm, Transform,
};
pub use operator::{
    apply_fracpow, operator_error_sup, scaled_fracpow, spectral_oracle, DenseSpdOperator, DiagonalOperator,
    FracpowResult, IterativeOperator, ShiftedSolveOperator,
};
pub use sum::{CompensatedSum, CompensatedVecSum};
