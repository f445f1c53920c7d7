//! A-priori error bounds and estimators.
//!
//! Only the SE bound is a proved inequality. The DE quantities are
//! estimators built from the discretization term alone and should be read
//! as order-of-magnitude predictions.

use std::f64::consts::{E, FRAC_PI_2, PI};

use crate::error::{domain, Result};
use crate::kernel::FractionalOrder;
use crate::params::{de_step, sn, strip_halfwidth};

/// Coefficient `3.3` obtained after substituting `tau*` into the peak value.
pub const OPERATOR_RATE: f64 = 3.3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EstimateKind {
    SeBound,
    DeScalar,
    DeOkayama,
    DeOperator,
    Generic,
}

/// Inputs an estimate was evaluated at.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EstimateInputs {
    pub alpha: f64,
    pub lambda: Option<f64>,
    pub tau: Option<f64>,
    pub n: usize,
    pub d: Option<f64>,
    pub r: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorEstimate {
    pub value: f64,
    pub kind: EstimateKind,
    pub inputs: EstimateInputs,
}

/// `e^{-t} / (2 sinh t)` written as `e^{-2t} / (1 - e^{-2t})`.
fn discretization_factor(t: f64) -> f64 {
    let q = (-2.0 * t).exp();
    q / -(-2.0 * t).exp_m1()
}

/// Discretization plus both truncation tails for a function analytic in a
/// strip of half-width `d` decaying like `C e^{-beta|x|}` / `C e^{-gamma|x|}`.
#[allow(clippy::too_many_arguments)]
pub fn generic_trapezoid_bound(
    nfd: f64,
    d: f64,
    h: f64,
    c: f64,
    beta: f64,
    gamma: f64,
    m: usize,
    n: usize,
) -> Result<f64> {
    if !(h > 0.0) {
        return Err(domain("h", h, "h > 0"));
    }
    if !(d > 0.0) {
        return Err(domain("d", d, "d > 0"));
    }
    if !(beta > 0.0) {
        return Err(domain("beta", beta, "beta > 0"));
    }
    if !(gamma > 0.0) {
        return Err(domain("gamma", gamma, "gamma > 0"));
    }
    let disc = nfd * discretization_factor(PI * d / h);
    let left = c / beta * (-beta * m as f64 * h).exp();
    let right = c / gamma * (-gamma * n as f64 * h).exp();
    Ok(disc + left + right)
}

/// `(sin(alpha pi)/pi) (3 / (alpha (1 - alpha))) exp(-2 sqrt(pi d alpha (1 - alpha)) sqrt(n))`.
///
/// For `d = pi/2` the exponent is `-pi sqrt(2 alpha (1 - alpha)) sqrt(n)`.
pub fn se_bound(order: FractionalOrder, n: usize, d: f64) -> Result<ErrorEstimate> {
    if n == 0 {
        return Err(domain("n", 0.0, "n >= 1"));
    }
    if !(d > 0.0 && d <= FRAC_PI_2 * (1.0 + 1e-15)) {
        return Err(domain("d", d, "0 < d <= pi/2"));
    }
    let ab = order.alpha_beta();
    let rate = 2.0 * (PI * d * ab).sqrt();
    let value = (order.alpha() * PI).sin() / PI * 3.0 / ab * (-rate * (n as f64).sqrt()).exp();
    Ok(ErrorEstimate {
        value,
        kind: EstimateKind::SeBound,
        inputs: EstimateInputs {
            alpha: order.alpha(),
            n,
            d: Some(d),
            ..Default::default()
        },
    })
}

/// `xi(d) = 2 / (cos d cos((pi/2) sin d))`.
pub fn xi(d: f64) -> Result<f64> {
    if !(d > 0.0 && d < FRAC_PI_2) {
        return Err(domain("d", d, "0 < d < pi/2"));
    }
    Ok(2.0 / (d.cos() * (FRAC_PI_2 * d.sin()).cos()))
}

/// `K_alpha = 1 / (alpha (1 - alpha)) / (1 - e^{-(pi/2) mu e})`.
pub fn k_alpha(order: FractionalOrder) -> f64 {
    1.0 / order.alpha_beta() / -(-FRAC_PI_2 * order.mu() * E).exp_m1()
}

/// `4 (sin(alpha pi) / pi) K_alpha`.
pub fn k_bar_alpha(order: FractionalOrder) -> f64 {
    4.0 * (order.alpha() * PI).sin() / PI * k_alpha(order)
}

/// `exp(-2 pi d n / ln(4 d n / mu))`, checking the step-rule admissibility.
fn de_decay(d: f64, n: usize, order: FractionalOrder) -> Result<f64> {
    de_step(n, d, order)?;
    let nf = n as f64;
    Ok((-2.0 * PI * d * nf / (4.0 * d * nf / order.mu()).ln()).exp())
}

/// `phi(lambda, tau) = xi(d) lambda^{-alpha} exp(-2 pi d n / ln(4 d n / mu))`
/// with `d = d(lambda, tau)` from the exact pole.
pub fn de_phi(lambda: f64, tau: f64, n: usize, order: FractionalOrder, r: f64) -> Result<f64> {
    let d = strip_halfwidth(lambda, tau, r)?;
    Ok(xi(d)? * order.power(lambda) * de_decay(d, n, order)?)
}

fn de_inputs(
    order: FractionalOrder,
    lambda: Option<f64>,
    tau: f64,
    n: usize,
    d: Option<f64>,
    r: f64,
) -> EstimateInputs {
    EstimateInputs {
        alpha: order.alpha(),
        lambda,
        tau: Some(tau),
        n,
        d,
        r: Some(r),
    }
}

/// Scalar DE estimator `K_alpha phi(lambda, tau)`.
pub fn de_estimate_scalar(lambda: f64, tau: f64, n: usize, order: FractionalOrder, r: f64) -> Result<ErrorEstimate> {
    let d = strip_halfwidth(lambda, tau, r)?;
    Ok(ErrorEstimate {
        value: k_alpha(order) * de_phi(lambda, tau, n, order, r)?,
        kind: EstimateKind::DeScalar,
        inputs: de_inputs(order, Some(lambda), tau, n, Some(d), r),
    })
}

/// The older estimator that carries `tau^{-alpha}` in place of `lambda^{-alpha}`:
/// `(tau^{-alpha} / mu) alpha (1 - alpha) (K_alpha xi(d) + e^{(pi/2) nu}) exp(...)`.
pub fn de_estimate_okayama(lambda: f64, tau: f64, n: usize, order: FractionalOrder, r: f64) -> Result<ErrorEstimate> {
    let d = strip_halfwidth(lambda, tau, r)?;
    let bracket = k_alpha(order) * xi(d)? + (FRAC_PI_2 * order.nu()).exp();
    let value = order.power(tau) / order.mu() * order.alpha_beta() * bracket * de_decay(d, n, order)?;
    Ok(ErrorEstimate {
        value,
        kind: EstimateKind::DeOkayama,
        inputs: de_inputs(order, Some(lambda), tau, n, Some(d), r),
    })
}

/// Closed-form peak value `2 tau^{-alpha} exp(-3 sqrt(alpha) s_n)`.
pub fn de_phi_at_lambda_star(tau: f64, n: usize, order: FractionalOrder, r: f64) -> Result<f64> {
    let s = sn(n, order, r)?;
    Ok(2.0 * order.power(tau) * (-3.0 * order.alpha().sqrt() * s).exp())
}

/// Closed-form value at the bottom of the spectrum `2 exp(-s_n^2 / ln tau)`.
pub fn de_phi_at_one(tau: f64, n: usize, order: FractionalOrder, r: f64) -> Result<f64> {
    if !(tau > 1.0) {
        return Err(domain("tau", tau, "tau > 1"));
    }
    let s = sn(n, order, r)?;
    Ok(2.0 * (-s * s / tau.ln()).exp())
}

/// Operator-level DE estimate `K_bar_alpha exp(-3.3 sqrt(alpha) s_n)`.
pub fn de_operator_estimate(n: usize, order: FractionalOrder, r: f64) -> Result<ErrorEstimate> {
    let s = sn(n, order, r)?;
    Ok(ErrorEstimate {
        value: k_bar_alpha(order) * (-OPERATOR_RATE * order.alpha().sqrt() * s).exp(),
        kind: EstimateKind::DeOperator,
        inputs: EstimateInputs {
            alpha: order.alpha(),
            n,
            r: Some(r),
            ..Default::default()
        },
    })
}
