//! Trapezoidal rules for `lambda^{-alpha}` written as partial fractions.
//!
//! Both the single-exponential (SE) substitution `t = e^x` and the
//! double-exponential (DE) substitution `tau t^2 = exp(pi sinh x)` turn the
//! integral
//!
//! ```text
//! lambda^{-alpha} = (2 sin(alpha pi) / pi) * int_0^inf t^{2 alpha - 1} (1 + t^2 lambda)^{-1} dt
//! ```
//!
//! into an integral over the real line. Truncating the trapezoidal sum to
//! `l = -M..=N` gives a rule whose every summand has the form
//! `c_l / (s_l + lambda)`, one resolvent per node. Weights and shifts are
//! stored as logarithms because the raw summands over/underflow long before
//! the rule has converged.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::error::{domain, Result};
use crate::sum::CompensatedSum;

/// `ln(f64::MIN_POSITIVE)`; weights below this are flushed to zero.
const LN_MIN_NORMAL: f64 = -708.396_418_532_264_1;
/// `ln(f64::MAX)`.
const LN_MAX: f64 = 709.782_712_893_384;

/// The exponent `alpha` in `lambda^{-alpha}` together with
/// `mu = min(alpha, 1 - alpha)` and `nu = max(alpha, 1 - alpha)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FractionalOrder {
    alpha: f64,
    mu: f64,
    nu: f64,
}

impl FractionalOrder {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(domain("alpha", alpha, "0 < alpha < 1"));
        }
        Ok(Self {
            alpha,
            mu: alpha.min(1.0 - alpha),
            nu: alpha.max(1.0 - alpha),
        })
    }

    #[inline]
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    #[inline]
    pub fn mu(&self) -> f64 {
        self.mu
    }

    #[inline]
    pub fn nu(&self) -> f64 {
        self.nu
    }

    /// `alpha (1 - alpha)`.
    #[inline]
    pub fn alpha_beta(&self) -> f64 {
        self.alpha * (1.0 - self.alpha)
    }

    /// `2 sin(alpha pi) / pi`, the constant in front of the integral.
    #[inline]
    pub fn prefactor(&self) -> f64 {
        2.0 * (self.alpha * PI).sin() / PI
    }

    /// Exact scalar value `lambda^{-alpha}`.
    #[inline]
    pub fn power(&self, lambda: f64) -> f64 {
        lambda.powf(-self.alpha)
    }
}

/// Which substitution a rule discretizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Transform {
    Se,
    De,
}

impl Transform {
    pub fn as_str(&self) -> &'static str {
        match self {
            Transform::Se => "se",
            Transform::De => "de",
        }
    }
}

/// One node of a rule in resolvent form `c / (s + lambda)`.
///
/// `log_weight` is `-inf` exactly when the weight underflowed; such terms
/// stay in the rule so the node count is preserved but contribute nothing.
/// `shift` is `exp(log_shift)` clamped to the positive normal range; the
/// clamp is immaterial next to `lambda >= 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResolventTerm {
    index: i64,
    log_weight: f64,
    weight: f64,
    log_shift: f64,
    shift: f64,
}

impl ResolventTerm {
    pub(crate) fn from_logs(index: i64, log_weight: f64, log_shift: f64) -> Self {
        let (log_weight, weight) = if log_weight < LN_MIN_NORMAL {
            (f64::NEG_INFINITY, 0.0)
        } else {
            (log_weight, log_weight.exp())
        };
        let shift = log_shift.exp().clamp(f64::MIN_POSITIVE, f64::MAX);
        Self {
            index,
            log_weight,
            weight,
            log_shift,
            shift,
        }
    }

    /// Node index `l` in `-M..=N`.
    pub fn index(&self) -> i64 {
        self.index
    }

    pub fn log_weight(&self) -> f64 {
        self.log_weight
    }

    /// `c = exp(log_weight)`; `+inf` only if `log_weight` exceeds `ln(f64::MAX)`.
    pub fn weight(&self) -> f64 {
        self.weight
    }

    pub fn log_shift(&self) -> f64 {
        self.log_shift
    }

    pub fn shift(&self) -> f64 {
        self.shift
    }

    /// False for underflowed terms, which are skipped during application.
    pub fn is_active(&self) -> bool {
        self.weight > 0.0
    }

    /// Both `c` and `s` representable without saturation, so the plain
    /// quotient `c / (s + lambda)` (and a genuine shifted solve) is valid.
    pub fn is_representable(&self) -> bool {
        self.log_weight <= LN_MAX && self.log_shift <= LN_MAX && self.log_shift >= LN_MIN_NORMAL
    }

    /// `c / (s + lambda)`.
    pub fn eval(&self, lambda: f64) -> f64 {
        if !self.is_active() {
            return 0.0;
        }
        if self.is_representable() {
            return self.weight / (self.shift + lambda);
        }
        // ln(s + lambda) = max + ln(1 + exp(min - max))
        let ln_lambda = lambda.ln();
        let (hi, lo) = if self.log_shift > ln_lambda {
            (self.log_shift, ln_lambda)
        } else {
            (ln_lambda, self.log_shift)
        };
        let ln_denominator = hi + (lo - hi).exp().ln_1p();
        (self.log_weight - ln_denominator).exp()
    }
}

/// A truncated trapezoidal rule in resolvent form.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    order: FractionalOrder,
    transform: Transform,
    h: f64,
    m: usize,
    n: usize,
    tau: f64,
    d: Option<f64>,
    terms: Vec<ResolventTerm>,
}

impl QuadratureRule {
    pub fn order(&self) -> FractionalOrder {
        self.order
    }

    pub fn transform(&self) -> Transform {
        self.transform
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    /// Left truncation `M` (nodes `l = -M..-1`).
    pub fn m(&self) -> usize {
        self.m
    }

    /// Right truncation `N` (nodes `l = 1..=N`).
    pub fn n(&self) -> usize {
        self.n
    }

    /// DE scaling parameter; `1` for SE rules.
    pub fn tau(&self) -> f64 {
        self.tau
    }

    /// Strip half-width the step was derived from, when known.
    pub fn d(&self) -> Option<f64> {
        self.d
    }

    /// Number of shifted solves `M + N + 1`.
    pub fn inversions(&self) -> usize {
        self.terms.len()
    }

    /// Terms ordered by ascending node index.
    pub fn terms(&self) -> &[ResolventTerm] {
        &self.terms
    }

    /// Terms with a nonzero weight.
    pub fn active_terms(&self) -> usize {
        self.terms.iter().filter(|t| t.is_active()).count()
    }

    pub(crate) fn with_d(mut self, d: f64) -> Self {
        self.d = Some(d);
        self
    }

    /// `sum_l c_l / (s_l + lambda)`, compensated and in fixed index order.
    ///
    /// The error analysis behind the parameter choices assumes `lambda >= 1`.
    pub fn eval(&self, lambda: f64) -> f64 {
        debug_assert!(lambda > 0.0);
        let mut acc = CompensatedSum::new();
        for term in &self.terms {
            acc.add(term.eval(lambda));
        }
        acc.value()
    }

    /// `|lambda^{-alpha} - eval(lambda)|`.
    pub fn error_at(&self, lambda: f64) -> f64 {
        (self.order.power(lambda) - self.eval(lambda)).abs()
    }
}

/// `g(x) = e^{2 alpha x} / (1 + e^{2x} lambda)`, the SE-transformed integrand.
pub fn se_integrand(lambda: f64, order: FractionalOrder, x: f64) -> f64 {
    let alpha = order.alpha();
    if x > 0.0 {
        (-2.0 * (1.0 - alpha) * x).exp() / ((-2.0 * x).exp() + lambda)
    } else {
        (2.0 * alpha * x).exp() / (1.0 + (2.0 * x).exp() * lambda)
    }
}

/// `ln cosh x` without overflow.
fn ln_cosh(x: f64) -> f64 {
    let a = x.abs();
    a + (-2.0 * a).exp().ln_1p() - std::f64::consts::LN_2
}

/// DE-transformed integrand
/// `(pi/2) tau^{1-alpha} exp(alpha pi sinh x) cosh x / (tau + lambda exp(pi sinh x))`.
pub fn de_integrand(lambda: f64, order: FractionalOrder, tau: f64, x: f64) -> f64 {
    let alpha = order.alpha();
    let u = PI * x.sinh();
    let ln_scale = FRAC_PI_2.ln() + (1.0 - alpha) * tau.ln() + ln_cosh(x);
    if u > 0.0 {
        let denominator = tau * (-u).exp() + lambda;
        (ln_scale - (1.0 - alpha) * u).exp() / denominator
    } else {
        let denominator = tau + lambda * u.exp();
        (ln_scale + alpha * u).exp() / denominator
    }
}

fn check_step(h: f64) -> Result<()> {
    if h.is_finite() && h > 0.0 {
        Ok(())
    } else {
        Err(domain("h", h, "finite h > 0"))
    }
}

/// SE rule on nodes `l = -m..=n`.
///
/// `log c_l = ln(2 sin(alpha pi) h / pi) - 2 (1 - alpha) l h`,
/// `s_l = e^{-2 l h}`.
pub fn build_se_rule(order: FractionalOrder, h: f64, m: usize, n: usize) -> Result<QuadratureRule> {
    check_step(h)?;
    let ln_base = (order.prefactor() * h).ln();
    let one_minus_alpha = 1.0 - order.alpha();
    let terms = (-(m as i64)..=n as i64)
        .map(|l| {
            let x = l as f64 * h;
            ResolventTerm::from_logs(l, ln_base - 2.0 * one_minus_alpha * x, -2.0 * x)
        })
        .collect();
    Ok(QuadratureRule {
        order,
        transform: Transform::Se,
        h,
        m,
        n,
        tau: 1.0,
        d: Some(FRAC_PI_2),
        terms,
    })
}

/// DE rule with `M = N = n`, i.e. `2n + 1` nodes.
///
/// `log c_l = ln(sin(alpha pi) h tau^{1-alpha} cosh(l h)) - (1 - alpha) pi sinh(l h)`,
/// `s_l = tau e^{-pi sinh(l h)}`.
pub fn build_de_rule(order: FractionalOrder, tau: f64, h: f64, n: usize) -> Result<QuadratureRule> {
    check_step(h)?;
    if !(tau >= 1.0 && tau.is_finite()) {
        return Err(domain("tau", tau, "finite tau >= 1"));
    }
    let alpha = order.alpha();
    let ln_tau = tau.ln();
    let ln_base = ((alpha * PI).sin() * h).ln() + (1.0 - alpha) * ln_tau;
    let terms = (-(n as i64)..=n as i64)
        .map(|l| {
            let x = l as f64 * h;
            let u = PI * x.sinh();
            ResolventTerm::from_logs(l, ln_base + ln_cosh(x) - (1.0 - alpha) * u, ln_tau - u)
        })
        .collect();
    Ok(QuadratureRule {
        order,
        transform: Transform::De,
        h,
        m: n,
        n,
        tau,
        d: None,
        terms,
    })
}

/// `sum_l c_l / (s_l + lambda)`.
pub fn eval_rule(rule: &QuadratureRule, lambda: f64) -> f64 {
    rule.eval(lambda)
}
