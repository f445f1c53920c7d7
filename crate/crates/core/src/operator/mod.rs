//! Applying a rule to an operator:
//! `L^{-alpha} g ~ sum_l c_l (s_l I + L)^{-1} g`.
//!
//! Shifted solves are independent and run on the rayon pool; the weighted
//! sum is accumulated sequentially in node order so results do not depend
//! on the number of workers.

mod dense;
mod diagonal;
mod iterative;
mod oracle;

use rayon::prelude::*;

use crate::error::{domain, FracpowError, Result};
use crate::kernel::{QuadratureRule, ResolventTerm};
use crate::sum::CompensatedVecSum;

pub use dense::DenseSpdOperator;
pub use diagonal::DiagonalOperator;
pub use iterative::{conjugate_gradient, CgOutcome, CsrMatrix, IterativeOperator};
pub use oracle::spectral_oracle;

/// Relative tolerance for the symmetry check on load.
pub const SYMMETRY_TOLERANCE: f64 = 1e-12;

/// Diagnostics of one shifted solve.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SolveStats {
    pub iterations: usize,
    pub relative_residual: f64,
}

/// Per-term record in a [`FracpowResult`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TermSolve {
    pub index: i64,
    pub shift: f64,
    pub stats: SolveStats,
}

/// A symmetric positive definite `L` that can solve `(sI + L) x = v`
/// for every `s > 0`.
pub trait ShiftedSolveOperator: Sync {
    fn dim(&self) -> usize;

    /// Caller-supplied certificate `m` with `sigma(L) ⊆ [m, inf)`.
    fn spectrum_lower_bound(&self) -> f64;

    fn solve_shifted(&self, shift: f64, v: &[f64]) -> Result<(Vec<f64>, SolveStats)>;
}

impl<T: ShiftedSolveOperator + ?Sized> ShiftedSolveOperator for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn spectrum_lower_bound(&self) -> f64 {
        (**self).spectrum_lower_bound()
    }

    fn solve_shifted(&self, shift: f64, v: &[f64]) -> Result<(Vec<f64>, SolveStats)> {
        (**self).solve_shifted(shift, v)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FracpowResult {
    pub vector: Vec<f64>,
    /// Nonzero-weight terms that were actually applied.
    pub terms_applied: usize,
    pub solver_stats: Vec<TermSolve>,
}

const LN_MAX: f64 = 709.782_712_893_384;

/// Contribution `c (sI + L)^{-1} g` of one term as `(scale, vector)`.
fn term_contribution<O: ShiftedSolveOperator + ?Sized>(
    term: &ResolventTerm,
    op: &O,
    g: &[f64],
) -> Result<(f64, Vec<f64>, SolveStats)> {
    if term.log_shift() > LN_MAX {
        // (sI + L)^{-1} = s^{-1} (I + L/s)^{-1} and L/s vanishes at this scale
        let scale = (term.log_weight() - term.log_shift()).exp();
        return Ok((scale, g.to_vec(), SolveStats::default()));
    }
    let (x, stats) = op.solve_shifted(term.shift(), g)?;
    if x.iter().any(|v| !v.is_finite()) {
        return Err(FracpowError::Solve {
            shift: term.shift(),
            reason: crate::error::SolveFailure::NonFinite,
        });
    }
    let scale = if term.weight().is_finite() {
        term.weight()
    } else {
        // c overflowed; fold s into the scale instead
        let scale = (term.log_weight() - term.log_shift()).exp();
        let s = term.shift();
        return Ok((scale, x.into_iter().map(|v| v * s).collect(), stats));
    };
    Ok((scale, x, stats))
}

/// `Q(L) g = sum_l c_l (s_l I + L)^{-1} g`, skipping underflowed terms.
pub fn apply_fracpow<O: ShiftedSolveOperator + ?Sized>(
    rule: &QuadratureRule,
    op: &O,
    g: &[f64],
) -> Result<FracpowResult> {
    let bound = op.spectrum_lower_bound();
    if !(bound >= 1.0) {
        return Err(FracpowError::SpectrumBound { bound });
    }
    if g.len() != op.dim() {
        return Err(FracpowError::DimensionMismatch {
            expected: op.dim(),
            found: g.len(),
        });
    }

    let active: Vec<&ResolventTerm> = rule.terms().iter().filter(|t| t.is_active()).collect();
    let solved: Vec<Result<(f64, Vec<f64>, SolveStats)>> =
        active.par_iter().map(|term| term_contribution(term, op, g)).collect();

    let mut acc = CompensatedVecSum::zeros(g.len());
    let mut solver_stats = Vec::with_capacity(active.len());
    for (term, outcome) in active.iter().zip(solved) {
        let (scale, x, stats) = outcome?;
        acc.add_scaled(scale, &x);
        solver_stats.push(TermSolve {
            index: term.index(),
            shift: term.shift(),
            stats,
        });
    }
    Ok(FracpowResult {
        vector: acc.into_vec(),
        terms_applied: active.len(),
        solver_stats,
    })
}

/// `L / m`, solving `(sI + L/m) x = v` as `x = m (s m I + L)^{-1} v`.
pub struct ScaledOperator<'a, O: ShiftedSolveOperator + ?Sized> {
    inner: &'a O,
    scale: f64,
}

impl<'a, O: ShiftedSolveOperator + ?Sized> ScaledOperator<'a, O> {
    /// `certificate` is a lower bound `m > 0` on the spectrum of `inner`.
    pub fn new(inner: &'a O, certificate: f64) -> Result<Self> {
        if !(certificate > 0.0 && certificate.is_finite()) {
            return Err(domain("m", certificate, "finite m > 0"));
        }
        Ok(Self {
            inner,
            scale: certificate,
        })
    }
}

impl<O: ShiftedSolveOperator + ?Sized> ShiftedSolveOperator for ScaledOperator<'_, O> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn spectrum_lower_bound(&self) -> f64 {
        1.0
    }

    fn solve_shifted(&self, shift: f64, v: &[f64]) -> Result<(Vec<f64>, SolveStats)> {
        let (mut x, stats) = self.inner.solve_shifted(shift * self.scale, v)?;
        if self.scale != 1.0 {
            x.iter_mut().for_each(|xi| *xi *= self.scale);
        }
        Ok((x, stats))
    }
}

/// `L^{-alpha} g = m^{-alpha} (L/m)^{-alpha} g` for a certificate `m > 0`.
pub fn scaled_fracpow<O: ShiftedSolveOperator + ?Sized>(
    rule: &QuadratureRule,
    op: &O,
    certificate: f64,
    g: &[f64],
) -> Result<FracpowResult> {
    let scaled = ScaledOperator::new(op, certificate)?;
    let mut result = apply_fracpow(rule, &scaled, g)?;
    let factor = certificate.powf(-rule.order().alpha());
    if factor != 1.0 {
        result.vector.iter_mut().for_each(|v| *v *= factor);
    }
    Ok(result)
}

/// `max_j |lambda_j^{-alpha} - Q(lambda_j)|`, the exact operator-norm error
/// for a diagonal operator.
pub fn operator_error_sup(rule: &QuadratureRule, op: &DiagonalOperator) -> f64 {
    op.eigenvalues()
        .iter()
        .map(|&lambda| rule.error_at(lambda))
        .fold(0.0, f64::max)
}
