//! Parameter selection for SE and DE rules.
//!
//! SE: the step is balanced against the two truncation tails so that
//! `pi d / h ~ alpha M h ~ (1 - alpha) N h`.
//!
//! DE: the strip of analyticity depends on `lambda` and `tau` through the
//! pole of the integrand closest to the real axis. The scaling `tau*`
//! equalizes the two peaks of the error over `lambda >= 1`, and the step
//! follows `h = ln(4 d n / mu) / n`.

use std::f64::consts::{E, FRAC_PI_2, PI};

use num_complex::Complex64;

use crate::error::{domain, FracpowError, Result};
use crate::kernel::{build_de_rule, build_se_rule, FractionalOrder, QuadratureRule};

/// Default strip safety factor `r`.
pub const DEFAULT_SAFETY: f64 = 0.95;

/// Rounded exponent in `tau* = exp(0.3 s_n / sqrt(alpha))`.
///
/// The equalization equation has the root `(sqrt(13) - 3) / 2 ~ 0.3028`; the
/// rounded value is what the published `tau* ~ 84.4` (n = 40, alpha = 1/2)
/// corresponds to, so it is used everywhere.
pub const TAU_EXPONENT: f64 = 0.3;

/// Unrounded root of the equalization equation, `(sqrt(13) - 3) / 2`.
pub fn exact_tau_exponent() -> f64 {
    (13f64.sqrt() - 3.0) / 2.0
}

/// Ceiling that ignores round-off just above an integer.
fn snapped_ceil(x: f64) -> usize {
    let nearest = x.round();
    if (x - nearest).abs() <= 1e-10 * x.abs().max(1.0) {
        nearest as usize
    } else {
        x.ceil() as usize
    }
}

fn check_se_strip(d: f64) -> Result<()> {
    if d > 0.0 && d <= FRAC_PI_2 * (1.0 + 1e-15) {
        Ok(())
    } else {
        Err(domain("d", d, "0 < d <= pi/2"))
    }
}

fn check_safety(r: f64) -> Result<()> {
    if r > 0.0 && r < 1.0 {
        Ok(())
    } else {
        Err(domain("r", r, "0 < r < 1"))
    }
}

/// SE step and truncation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeParams {
    pub order: FractionalOrder,
    /// Strip half-width the balancing assumes.
    pub d: f64,
    pub h: f64,
    pub m: usize,
    pub n: usize,
}

impl SeParams {
    /// `M + N + 1`.
    pub fn inversions(&self) -> usize {
        self.m + self.n + 1
    }

    pub fn rule(&self) -> Result<QuadratureRule> {
        Ok(build_se_rule(self.order, self.h, self.m, self.n)?.with_d(self.d))
    }
}

/// `M = ceil(pi d / (alpha h^2))`, `N = ceil(pi d / ((1 - alpha) h^2))`.
pub fn se_params_from_h(order: FractionalOrder, h: f64, d: f64) -> Result<SeParams> {
    if !(h.is_finite() && h > 0.0) {
        return Err(domain("h", h, "finite h > 0"));
    }
    check_se_strip(d)?;
    let pd = PI * d / (h * h);
    Ok(SeParams {
        order,
        d,
        h,
        m: snapped_ceil(pd / order.alpha()),
        n: snapped_ceil(pd / (1.0 - order.alpha())),
    })
}

/// Inverts `n ~ pi d / (h^2 alpha (1 - alpha))` for `h`; the returned
/// inversion count may exceed `n_target` by the ceiling slack.
pub fn se_params_from_n(order: FractionalOrder, n_target: usize, d: f64) -> Result<SeParams> {
    if n_target < 3 {
        return Err(domain("n", n_target as f64, "n >= 3"));
    }
    check_se_strip(d)?;
    let h = (PI * d / (n_target as f64 * order.alpha_beta())).sqrt();
    se_params_from_h(order, h, d)
}

/// `(c1, c2) = (2 pi^2 r, 4 pi r / mu)`.
pub fn de_constants(order: FractionalOrder, r: f64) -> Result<(f64, f64)> {
    check_safety(r)?;
    Ok((2.0 * PI * PI * r, 4.0 * PI * r / order.mu()))
}

/// `s_n = sqrt(c1 n / ln(c2 n))`.
pub fn sn(n: usize, order: FractionalOrder, r: f64) -> Result<f64> {
    let (c1, c2) = de_constants(order, r)?;
    let arg = c2 * n as f64;
    if arg <= 1.0 {
        return Err(domain("c2*n", arg, "c2*n > 1 so that ln(c2*n) > 0"));
    }
    Ok((c1 * n as f64 / arg.ln()).sqrt())
}

/// `tau* = exp(0.3 s_n / sqrt(alpha))`.
pub fn tau_star(n: usize, order: FractionalOrder, r: f64) -> Result<f64> {
    Ok((TAU_EXPONENT * sn(n, order, r)? / order.alpha().sqrt()).exp())
}

/// `lambda* = tau exp(s_n / sqrt(alpha))`, the approximate location of the
/// interior maximum of the DE error over `lambda`.
pub fn lambda_star(n: usize, order: FractionalOrder, tau: f64, r: f64) -> Result<f64> {
    Ok(tau * (sn(n, order, r)? / order.alpha().sqrt()).exp())
}

/// Principal pole `x0 = asinh(ln(tau/lambda)/pi + i)` of the DE integrand.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoleLocation {
    pub x0: Complex64,
    pub im_x0: f64,
}

/// `asinh(u + i)` for `u >= 0`, using `w^2 + 1 = u (u + 2i)` so nothing cancels.
fn asinh_shifted(u: f64) -> Complex64 {
    debug_assert!(u >= 0.0);
    let w = Complex64::new(u, 1.0);
    let root = u.sqrt() * Complex64::new(u, 2.0).sqrt();
    (w + root).ln()
}

/// Pole closest to the real axis. For `ln(tau/lambda) < 0` the reflection
/// `asinh(w) = -asinh(-w)` avoids cancellation in `w + sqrt(w^2 + 1)`.
pub fn pole_x0(lambda: f64, tau: f64) -> PoleLocation {
    let u = (tau / lambda).ln() / PI;
    let x0 = if u >= 0.0 {
        asinh_shifted(u)
    } else {
        // -asinh(|u| - i) = -conj(asinh(|u| + i))
        let a = asinh_shifted(-u);
        Complex64::new(-a.re, a.im)
    };
    PoleLocation { x0, im_x0: x0.im }
}

/// `Im x0 ~ pi / ln(lambda / tau)` for `lambda >> tau`.
pub fn im_x0_large_lambda(lambda: f64, tau: f64) -> Result<f64> {
    if !(lambda > tau) {
        return Err(domain("lambda", lambda, "lambda > tau"));
    }
    Ok(PI / (lambda / tau).ln())
}

/// `Im x0 ~ pi / ln(tau)` for `lambda = 1`, `tau >> 1`.
pub fn im_x0_large_tau(tau: f64) -> Result<f64> {
    if !(tau > 1.0) {
        return Err(domain("tau", tau, "tau > 1"));
    }
    Ok(PI / tau.ln())
}

/// `d(lambda, tau) = r Im x0` from the exact pole.
pub fn strip_halfwidth(lambda: f64, tau: f64, r: f64) -> Result<f64> {
    check_safety(r)?;
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(domain("lambda", lambda, "finite lambda > 0"));
    }
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(domain("tau", tau, "finite tau > 0"));
    }
    Ok(r * pole_x0(lambda, tau).im_x0)
}

/// Smallest `n` with `n >= mu e / (4 d)`.
pub fn de_min_n(d: f64, order: FractionalOrder) -> usize {
    (order.mu() * E / (4.0 * d)).ceil().max(1.0) as usize
}

/// `h = ln(4 d n / mu) / n`, admissible for `n >= mu e / (4 d)`.
pub fn de_step(n: usize, d: f64, order: FractionalOrder) -> Result<f64> {
    if !(d > 0.0 && d < FRAC_PI_2) {
        return Err(domain("d", d, "0 < d < pi/2"));
    }
    let threshold = order.mu() * E / (4.0 * d);
    if n == 0 || (n as f64) < threshold {
        return Err(FracpowError::StepAdmissibility {
            n,
            min_n: de_min_n(d, order),
            d,
        });
    }
    let n = n as f64;
    Ok((4.0 * d * n / order.mu()).ln() / n)
}

/// Where the DE strip half-width is taken from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StripChoice {
    /// `d = r Im x0(lambda, tau)` at the given spectral point.
    AtLambda(f64),
    /// Caller-supplied `d`.
    Fixed(f64),
}

/// Everything needed to build a DE rule, plus the constants it came from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeConfig {
    pub order: FractionalOrder,
    pub n: usize,
    pub r: f64,
    pub c1: f64,
    pub c2: f64,
    pub s_n: f64,
    pub tau: f64,
    pub d: f64,
    pub h: f64,
}

impl DeConfig {
    pub fn rule(&self) -> Result<QuadratureRule> {
        Ok(build_de_rule(self.order, self.tau, self.h, self.n)?.with_d(self.d))
    }

    /// `2n + 1`.
    pub fn inversions(&self) -> usize {
        2 * self.n + 1
    }
}

/// Operator-level DE configuration: `tau = tau*`, `d` from the exact pole
/// at `lambda = 1`, `h` from the step rule.
pub fn de_config(n: usize, order: FractionalOrder, r: f64) -> Result<DeConfig> {
    de_config_with(n, order, r, None, StripChoice::AtLambda(1.0))
}

/// As [`de_config`] with an optional `tau` override and a choice of strip.
pub fn de_config_with(
    n: usize,
    order: FractionalOrder,
    r: f64,
    tau: Option<f64>,
    strip: StripChoice,
) -> Result<DeConfig> {
    let (c1, c2) = de_constants(order, r)?;
    let s_n = sn(n, order, r)?;
    let tau = match tau {
        Some(t) if t >= 1.0 && t.is_finite() => t,
        Some(t) => return Err(domain("tau", t, "finite tau >= 1")),
        None => (TAU_EXPONENT * s_n / order.alpha().sqrt()).exp(),
    };
    let d = match strip {
        StripChoice::AtLambda(lambda) => strip_halfwidth(lambda, tau, r)?,
        StripChoice::Fixed(d) => d,
    };
    let h = de_step(n, d, order)?;
    Ok(DeConfig {
        order,
        n,
        r,
        c1,
        c2,
        s_n,
        tau,
        d,
        h,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn order(alpha: f64) -> FractionalOrder {
        FractionalOrder::new(alpha).unwrap()
    }

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * b.abs()
    }

    #[test]
    fn se_params_from_h_examples() {
        let p = se_params_from_h(order(0.5), 1.0, FRAC_PI_2).unwrap();
        assert_eq!((p.m, p.n, p.inversions()), (10, 10, 21));
        let p = se_params_from_h(order(0.25), 1.0, FRAC_PI_2).unwrap();
        assert_eq!((p.m, p.n, p.inversions()), (20, 7, 28));
        // pi d / (alpha h^2) = (pi^2 / 4) / 0.125 = 19.74
        let p = se_params_from_h(order(0.5), 0.5, PI / 4.0).unwrap();
        assert_eq!((p.m, p.n, p.inversions()), (20, 20, 41));
    }

    #[test]
    fn se_params_domain() {
        assert!(se_params_from_h(order(0.5), 1.0, 0.0).is_err());
        assert!(se_params_from_h(order(0.5), 1.0, 1.6).is_err());
        assert!(se_params_from_h(order(0.5), 0.0, 1.0).is_err());
        assert!(se_params_from_n(order(0.5), 2, 1.0).is_err());
    }

    #[test]
    fn se_params_from_n_examples() {
        let p = se_params_from_n(order(0.5), 155, FRAC_PI_2).unwrap();
        assert!((p.h - 0.35686).abs() < 5e-6);
        assert_eq!((p.m, p.n, p.inversions()), (78, 78, 157));

        let p = se_params_from_n(order(0.5), 4, FRAC_PI_2).unwrap();
        assert!((p.h - 2.2214).abs() < 1e-4);
        // pi d / (alpha h^2) = 2 exactly
        assert_eq!((p.m, p.n), (2, 2));

        // M = n (1 - alpha), N = n alpha exactly; no spurious round-up
        let p = se_params_from_n(order(0.75), 100, PI / 4.0).unwrap();
        assert!((p.h - 0.36276).abs() < 1e-5);
        assert_eq!((p.m, p.n, p.inversions()), (25, 75, 101));
    }

    #[test]
    fn sn_examples() {
        let (c1, c2) = de_constants(order(0.5), 0.95).unwrap();
        assert!(close(c1, 18.7522, 1e-4));
        assert!(close(c2, 23.8761, 1e-4));
        assert!(close(sn(40, order(0.5), 0.95).unwrap(), 10.455, 2e-4));
        assert!(close(sn(40, order(0.25), 0.95).unwrap(), 9.963, 2e-4));
        assert!(sn(0, order(0.5), 0.95).is_err());
        let mut prev = 0.0;
        for n in 3..500 {
            let s = sn(n, order(0.5), 0.95).unwrap();
            assert!(s > prev);
            prev = s;
        }
    }

    #[test]
    fn tau_star_examples() {
        let t = tau_star(40, order(0.5), 0.95).unwrap();
        assert!((t - 84.4).abs() < 0.5, "tau* = {t}");
        let t = tau_star(160, order(0.5), 0.95).unwrap();
        assert!(close(t, 3267.0, 3e-3), "tau* = {t}");
        let near_one = tau_star(40, order(1.0 - 1e-6), 0.95).unwrap();
        let limit = (0.3 * sn(40, order(1.0 - 1e-6), 0.95).unwrap()).exp();
        assert!(close(near_one, limit, 1e-6));
        assert!((exact_tau_exponent() - 0.302_775_637_7).abs() < 1e-9);
    }

    #[test]
    fn lambda_star_examples() {
        let l = lambda_star(40, order(0.5), 84.4, 0.95).unwrap();
        assert!(close(l, 2.2e8, 0.02), "lambda* = {l:e}");
        let l = lambda_star(40, order(0.25), 100.0, 0.95).unwrap();
        assert!(close(l, 4.5e10, 0.02), "lambda* = {l:e}");
        let a = lambda_star(40, order(0.6), 100.0, 0.95).unwrap();
        let b = lambda_star(40, order(0.8), 100.0, 0.95).unwrap();
        assert!(b < a);
    }

    #[test]
    fn pole_at_equal_arguments() {
        let p = pole_x0(7.0, 7.0);
        assert!(p.x0.re.abs() < 1e-15);
        assert!((p.im_x0 - FRAC_PI_2).abs() < 1e-15);
    }

    #[test]
    fn pole_reproduces_sinh() {
        for &(lambda, tau) in &[(1e12, 100.0), (1.0, 84.4), (1e16, 1.0), (1.0, 1e16), (3.0, 2.9)] {
            let p = pole_x0(lambda, tau);
            let w = Complex64::new((tau / lambda).ln() / PI, 1.0);
            assert!((p.x0.sinh() - w).norm() <= 1e-13 * w.norm());
            assert!(p.im_x0 > 0.0 && p.im_x0 <= FRAC_PI_2);
        }
    }

    #[test]
    fn pole_reflection_symmetry() {
        for k in 0..200 {
            let u = -10.0 + 0.1 * k as f64;
            let a = pole_x0(1.0, (PI * u).exp()).im_x0;
            let b = pole_x0((PI * u).exp(), 1.0).im_x0;
            assert!((a - b).abs() <= 1e-14, "u = {u}");
        }
    }

    #[test]
    fn asymptotic_poles() {
        assert!(close(im_x0_large_lambda(1e12, 100.0).unwrap(), 0.13644, 1e-4));
        assert!(close(im_x0_large_lambda(PI.exp() * 5.0, 5.0).unwrap(), 1.0, 1e-12));
        assert!(im_x0_large_lambda(100.0, 100.0).is_err());
        assert!(close(im_x0_large_tau(PI.exp()).unwrap(), 1.0, 1e-12));
        assert!(close(im_x0_large_tau(84.4).unwrap(), 0.7083, 1e-3));
        assert!(im_x0_large_tau(1.0).is_err());
        let mut prev = f64::INFINITY;
        for k in 1..20 {
            let v = im_x0_large_lambda(10f64.powi(2 + k), 100.0).unwrap();
            assert!(v < prev);
            prev = v;
        }
    }

    #[test]
    fn strip_halfwidth_examples() {
        assert!(close(strip_halfwidth(5.0, 5.0, 0.95).unwrap(), 0.95 * FRAC_PI_2, 1e-14));
        assert!(strip_halfwidth(1.0, 1.0, 1.0).is_err());
        assert!(strip_halfwidth(1.0, 1.0, 0.0).is_err());
        let d = strip_halfwidth(1.0, 84.4, 0.95).unwrap();
        assert!((d - 0.5169).abs() < 2e-3, "d = {d}");
    }

    #[test]
    fn de_step_examples() {
        let h = de_step(40, 0.5169, order(0.5)).unwrap();
        assert!((h - 0.1277).abs() < 1e-4);
        let h = de_step(100, 0.1266, order(0.5)).unwrap();
        assert!((h - 0.04618).abs() < 1e-5);

        // boundary: n = ceil(mu e / (4 d))
        let d = 0.5;
        let n = de_min_n(d, order(0.5));
        assert_eq!(n, 1);
        let h = de_step(n, d, order(0.5)).unwrap();
        assert!(h >= 1.0 / n as f64);

        let d = 0.01;
        let min = de_min_n(d, order(0.5));
        assert_eq!(min, 34);
        assert!(de_step(min, d, order(0.5)).is_ok());
        match de_step(min - 1, d, order(0.5)) {
            Err(FracpowError::StepAdmissibility { min_n, .. }) => assert_eq!(min_n, 34),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn de_config_pipeline() {
        let cfg = de_config(40, order(0.5), 0.95).unwrap();
        assert!((cfg.tau - 84.4).abs() < 0.5);
        assert!((cfg.d - 0.5169).abs() < 2e-3);
        assert!((cfg.h - 0.1277).abs() < 2e-4);
        assert_eq!(cfg.inversions(), 81);

        let other = de_config(40, order(0.5), 0.5).unwrap();
        assert!(other.tau != cfg.tau && other.d != cfg.d && other.h != cfg.h);

        // n = 2 is admissible: mu e / (4 d) < 1 here
        assert!(de_config(2, order(0.5), 0.95).is_ok());
        assert!(de_config(40, order(0.5), 1.2).unwrap_err().to_string().contains("r"));
    }
}
