use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt::Write as _;

use fracpow::estimates::{
    de_estimate_okayama, de_estimate_scalar, de_operator_estimate, de_phi, de_phi_at_lambda_star, de_phi_at_one,
    generic_trapezoid_bound, se_bound,
};
use fracpow::io::{read_matrix_market, read_vector, write_vector};
use fracpow::operator::{CsrMatrix, IterativeOperator};
use fracpow::params::{
    de_config_with, de_step, lambda_star, se_params_from_h, se_params_from_n, sn, strip_halfwidth, tau_star, SeParams,
    StripChoice, DEFAULT_SAFETY,
};
use fracpow::{
    build_de_rule, operator_error_sup, scaled_fracpow, DenseSpdOperator, DiagonalOperator, FractionalOrder,
    QuadratureRule, ShiftedSolveOperator,
};
use rayon::prelude::*;

use crate::args::{KindArg, Options, SolverArg, TransformArg};
use crate::{num, param, CliError};

type Result<T> = std::result::Result<T, CliError>;

const ALPHA_GRID: [f64; 3] = [0.25, 0.5, 0.75];

fn order(alpha: f64) -> Result<FractionalOrder> {
    Ok(FractionalOrder::new(alpha)?)
}

fn required_order(opts: &Options) -> Result<FractionalOrder> {
    order(opts.alpha.ok_or_else(|| param("--alpha is required"))?)
}

fn safety(opts: &Options) -> f64 {
    opts.r.unwrap_or(DEFAULT_SAFETY)
}

fn transform(opts: &Options) -> Result<TransformArg> {
    opts.transform.ok_or_else(|| param("--transform {se,de} is required"))
}

fn strip_override(opts: &Options) -> Result<Option<f64>> {
    match (opts.d, opts.d_pi_over) {
        (Some(_), Some(_)) => Err(param("give at most one of --d and --d-pi-over")),
        (Some(d), None) => Ok(Some(d)),
        (None, Some(0)) => Err(param("--d-pi-over must be positive")),
        (None, Some(k)) => Ok(Some(PI / k as f64)),
        (None, None) => Ok(None),
    }
}

fn single_n(opts: &Options) -> Result<Option<usize>> {
    match opts.n.as_slice() {
        [] => Ok(None),
        [n] => Ok(Some(*n)),
        _ => Err(param("this command takes a single --n")),
    }
}

fn single_lambda(opts: &Options) -> Result<Option<f64>> {
    match opts.lambda.as_slice() {
        [] => Ok(None),
        &[l] => Ok(Some(l)),
        _ => Err(param("this command takes a single --lambda")),
    }
}

fn check_lambda(lambda: f64) -> Result<()> {
    if lambda >= 1.0 && lambda.is_finite() {
        Ok(())
    } else {
        Err(param(format!(
            "lambda = {lambda} is below 1; rules assume a spectrum in [1, inf), so divide by a lower bound m first and multiply the result by m^(-alpha)"
        )))
    }
}

/// A rule with the parameters it was built from.
struct Built {
    rule: QuadratureRule,
    /// The `n` the caller asked for, or `M + N + 1` when `h` was given.
    n: usize,
    tau: f64,
    d: f64,
}

fn se_params(o: FractionalOrder, n: Option<usize>, h: Option<f64>, d: f64) -> Result<(SeParams, usize)> {
    match (n, h) {
        (Some(n), None) => Ok((se_params_from_n(o, n, d)?, n)),
        (None, Some(h)) => {
            let p = se_params_from_h(o, h, d)?;
            Ok((p, p.inversions()))
        }
        _ => Err(param("SE needs exactly one of --n and --h")),
    }
}

/// SE bound for the rule actually built; at `n_target` when `n` was given.
fn se_estimate(p: &SeParams, n_target: Option<usize>) -> Result<f64> {
    let o = p.order;
    match n_target {
        Some(n) => Ok(se_bound(o, n, p.d)?.value),
        None => Ok(o.prefactor()
            * generic_trapezoid_bound(
                1.0 / o.alpha_beta(),
                p.d,
                p.h,
                1.0,
                2.0 * o.alpha(),
                2.0 * (1.0 - o.alpha()),
                p.m,
                p.n,
            )?),
    }
}

fn build_se(o: FractionalOrder, opts: &Options, n: Option<usize>) -> Result<(Built, f64)> {
    let d = strip_override(opts)?.unwrap_or(FRAC_PI_2);
    let (p, n_col) = se_params(o, n, opts.h, d)?;
    let estimate = se_estimate(&p, n)?;
    let built = Built {
        rule: p.rule()?,
        n: n_col,
        tau: 1.0,
        d,
    };
    Ok((built, estimate))
}

/// DE rule with `M = N = n`; the strip is taken at `strip_lambda` unless
/// overridden, and `--h` replaces the step rule.
fn build_de(o: FractionalOrder, opts: &Options, n: Option<usize>, strip_lambda: f64) -> Result<Built> {
    let n = n.ok_or_else(|| param("DE needs --n"))?;
    let r = safety(opts);
    let tau = match opts.tau {
        Some(t) => t,
        None => tau_star(n, o, r)?,
    };
    let d = match strip_override(opts)? {
        Some(d) => d,
        None => strip_halfwidth(strip_lambda, tau, r)?,
    };
    let h = match opts.h {
        Some(h) => h,
        None => de_step(n, d, o)?,
    };
    Ok(Built {
        rule: build_de_rule(o, tau, h, n)?,
        n,
        tau,
        d,
    })
}

fn collect_rows(rows: Vec<Result<String>>) -> Result<String> {
    let mut out = String::new();
    for row in rows {
        out.push_str(&row?);
        out.push('\n');
    }
    Ok(out)
}

pub fn nodes(opts: &Options) -> Result<String> {
    let o = required_order(opts)?;
    let n = single_n(opts)?;
    let t = transform(opts)?;
    let built = match t {
        TransformArg::Se => build_se(o, opts, n)?.0,
        TransformArg::De => build_de(o, opts, n, 1.0)?,
    };
    let rule = &built.rule;
    let mut out = String::new();
    writeln!(
        out,
        "# transform={} alpha={} tau={} h={} d={} M={} N={} inversions={}",
        rule.transform().as_str(),
        num(o.alpha()),
        num(rule.tau()),
        num(rule.h()),
        num(built.d),
        rule.m(),
        rule.n(),
        rule.inversions()
    )
    .unwrap();
    out.push_str("index,log_weight,weight,shift\n");
    for term in rule.terms() {
        writeln!(
            out,
            "{},{},{},{}",
            term.index(),
            num(term.log_weight()),
            num(term.weight()),
            num(term.shift())
        )
        .unwrap();
    }
    Ok(out)
}

pub fn scalar(opts: &Options) -> Result<String> {
    let o = required_order(opts)?;
    let t = transform(opts)?;
    if opts.lambda.is_empty() {
        return Err(param("--lambda is required"));
    }
    for &lambda in &opts.lambda {
        check_lambda(lambda)?;
    }
    let ns: Vec<Option<usize>> = if opts.n.is_empty() {
        vec![None]
    } else {
        opts.n.iter().map(|&n| Some(n)).collect()
    };
    let jobs: Vec<(f64, Option<usize>)> = opts
        .lambda
        .iter()
        .flat_map(|&l| ns.iter().map(move |&n| (l, n)))
        .collect();
    let r = safety(opts);
    let rows: Vec<Result<String>> = jobs
        .par_iter()
        .map(|&(lambda, n)| {
            let (built, estimate) = match t {
                TransformArg::Se => build_se(o, opts, n)?,
                TransformArg::De => {
                    let b = build_de(o, opts, n, lambda)?;
                    let e = de_estimate_scalar(lambda, b.tau, b.n, o, r)?.value;
                    (b, e)
                }
            };
            let approx = built.rule.eval(lambda);
            let exact = o.power(lambda);
            Ok(format!(
                "{},{},{},{},{},{}",
                num(lambda),
                built.n,
                num(approx),
                num(exact),
                num((approx - exact).abs()),
                num(estimate)
            ))
        })
        .collect();
    Ok(format!(
        "lambda,n,approx,exact,abs_error,estimate\n{}",
        collect_rows(rows)?
    ))
}

/// The operator, plus its eigenvalues when it is diagonal.
type Loaded = (Box<dyn ShiftedSolveOperator>, Option<Vec<f64>>);

fn load_operator(opts: &Options, cg_tol: f64) -> Result<Loaded> {
    let m = opts.spectrum_lower_bound.unwrap_or(1.0);
    let (dim, triplets) = match (&opts.matrix, opts.artificial) {
        (Some(_), true) => return Err(param("give either --matrix or --artificial, not both")),
        (None, false) => return Err(param("--matrix or --artificial is required")),
        (None, true) => {
            let eig = DiagonalOperator::artificial().eigenvalues().to_vec();
            let triplets: Vec<_> = eig.iter().enumerate().map(|(i, &v)| (i, i, v)).collect();
            (eig.len(), triplets)
        }
        (Some(path), false) => {
            let mm = read_matrix_market(path)?;
            (mm.dim, mm.triplets)
        }
    };
    let default = if opts.artificial {
        SolverArg::Diag
    } else {
        SolverArg::Dense
    };
    Ok(match opts.solver.unwrap_or(default) {
        SolverArg::Diag => {
            let diag = DiagonalOperator::from_triplets(dim, &triplets)?;
            let eig = diag.eigenvalues().to_vec();
            (Box::new(DiagonalOperator::with_bound(eig.clone(), m)?), Some(eig))
        }
        SolverArg::Dense => (Box::new(DenseSpdOperator::from_triplets(dim, &triplets, m)?), None),
        SolverArg::Cg => {
            let csr = CsrMatrix::from_triplets(dim, &triplets)?;
            let max_iterations = 20 * dim.max(50);
            (Box::new(IterativeOperator::new(csr, m, cg_tol, max_iterations)?), None)
        }
    })
}

pub fn operator(opts: &Options) -> Result<String> {
    let o = required_order(opts)?;
    let t = transform(opts)?;
    let n = single_n(opts)?;
    let r = safety(opts);
    let (built, estimate) = match t {
        TransformArg::Se => build_se(o, opts, n)?,
        TransformArg::De => {
            let b = build_de(o, opts, n, 1.0)?;
            let e = de_operator_estimate(b.n, o, r)?.value;
            (b, e)
        }
    };
    let cg_tol = opts.cg_tol.unwrap_or(1e-12f64.min(0.01 * estimate));
    let (op, eigenvalues) = load_operator(opts, cg_tol)?;
    let g = match &opts.vector {
        Some(path) => read_vector(path)?,
        None => vec![1.0; op.dim()],
    };
    let m = opts.spectrum_lower_bound.unwrap_or(1.0);
    let result = scaled_fracpow(&built.rule, &*op, m, &g)?;

    let sup = if opts.diag_exact {
        let eig = eigenvalues
            .ok_or_else(|| param("--diag-exact needs a diagonal operator (--artificial or --solver diag)"))?;
        Some(if m == 1.0 {
            operator_error_sup(&built.rule, &DiagonalOperator::new(eig)?)
        } else {
            let scale = m.powf(-o.alpha());
            eig.iter()
                .map(|&l| (o.power(l) - scale * built.rule.eval(l / m)).abs())
                .fold(0.0, f64::max)
        })
    } else {
        None
    };
    if let Some(path) = &opts.out {
        write_vector(path, &result.vector)?;
    }

    let iterations = result
        .solver_stats
        .iter()
        .map(|s| s.stats.iterations)
        .max()
        .unwrap_or(0);
    let mut out = String::from("dim,transform,alpha,n,inversions,terms_applied,estimate,solver_iterations");
    if sup.is_some() {
        out.push_str(",sup_error");
    }
    write!(
        out,
        "\n{},{},{},{},{},{},{},{}",
        op.dim(),
        built.rule.transform().as_str(),
        num(o.alpha()),
        built.n,
        built.rule.inversions(),
        result.terms_applied,
        num(estimate),
        iterations
    )
    .unwrap();
    if let Some(sup) = sup {
        write!(out, ",{}", num(sup)).unwrap();
    }
    out.push('\n');
    Ok(out)
}

pub fn estimate(opts: &Options) -> Result<String> {
    let o = required_order(opts)?;
    let kind = opts
        .kind
        .ok_or_else(|| param("--kind {se,ere,ere2,fest} is required"))?;
    let n = single_n(opts)?;
    let r = safety(opts);
    let mut lines: Vec<(&str, String)> = Vec::new();
    match kind {
        KindArg::Se => {
            let (built, value) = build_se(o, opts, n)?;
            let rule = &built.rule;
            lines.extend([
                ("kind", "se".into()),
                ("value", num(value)),
                ("alpha", num(o.alpha())),
                ("n", built.n.to_string()),
                ("d", num(built.d)),
                ("h", num(rule.h())),
                ("M", rule.m().to_string()),
                ("N", rule.n().to_string()),
                ("inversions", rule.inversions().to_string()),
            ]);
        }
        KindArg::Fest => {
            let n = n.ok_or_else(|| param("--n is required"))?;
            let strip = match strip_override(opts)? {
                Some(d) => StripChoice::Fixed(d),
                None => StripChoice::AtLambda(1.0),
            };
            let cfg = de_config_with(n, o, r, opts.tau, strip)?;
            lines.extend([
                ("kind", "fest".into()),
                ("value", num(de_operator_estimate(n, o, r)?.value)),
                ("alpha", num(o.alpha())),
                ("n", n.to_string()),
                ("r", num(r)),
                ("tau", num(cfg.tau)),
                ("d", num(cfg.d)),
                ("h", num(cfg.h)),
                ("M", n.to_string()),
                ("N", n.to_string()),
                ("inversions", cfg.inversions().to_string()),
                ("s_n", num(cfg.s_n)),
                ("lambda_star", num(lambda_star(n, o, cfg.tau, r)?)),
            ]);
        }
        KindArg::Ere | KindArg::Ere2 => {
            let n = n.ok_or_else(|| param("--n is required"))?;
            let lambda = single_lambda(opts)?.ok_or_else(|| param("--lambda is required"))?;
            check_lambda(lambda)?;
            let tau = match opts.tau {
                Some(t) => t,
                None => tau_star(n, o, r)?,
            };
            let (name, e) = if kind == KindArg::Ere {
                ("ere", de_estimate_scalar(lambda, tau, n, o, r)?)
            } else {
                ("ere2", de_estimate_okayama(lambda, tau, n, o, r)?)
            };
            let d = e.inputs.d.expect("DE estimates record d");
            lines.extend([
                ("kind", name.into()),
                ("value", num(e.value)),
                ("alpha", num(o.alpha())),
                ("n", n.to_string()),
                ("r", num(r)),
                ("lambda", num(lambda)),
                ("tau", num(tau)),
                ("d", num(d)),
            ]);
            if let Ok(h) = de_step(n, d, o) {
                lines.push(("h", num(h)));
            }
            lines.extend([("M", n.to_string()), ("N", n.to_string()), ("s_n", num(sn(n, o, r)?))]);
        }
    }
    Ok(lines.into_iter().map(|(k, v)| format!("{k}={v}\n")).collect())
}

fn fig14_ns(opts: &Options) -> Vec<usize> {
    if !opts.n.is_empty() {
        return opts.n.clone();
    }
    let mut ns = vec![25];
    ns.extend((1..=8).map(|k| 50 * k));
    ns
}

fn fig14_alphas(opts: &Options) -> Vec<f64> {
    opts.alpha.map_or(ALPHA_GRID.to_vec(), |a| vec![a])
}

fn se_sup(o: FractionalOrder, n: usize, d: f64, op: &DiagonalOperator) -> Result<f64> {
    Ok(operator_error_sup(&se_params_from_n(o, n, d)?.rule()?, op))
}

fn jobs(alphas: &[f64], ns: &[usize]) -> Vec<(f64, usize)> {
    alphas.iter().flat_map(|&a| ns.iter().map(move |&n| (a, n))).collect()
}

pub fn figure(opts: &Options) -> Result<String> {
    match opts.figure.ok_or_else(|| param("--figure {1,2,3,4} is required"))? {
        1 => figure1(opts),
        2 => figure2(opts),
        3 => figure3(opts),
        4 => figure4(opts),
        id => Err(param(format!("--figure must be 1, 2, 3 or 4, got {id}"))),
    }
}

/// SE on the artificial operator with `d = pi/4` and `d = pi/2`; the bound
/// is for `d = pi/2`.
fn figure1(opts: &Options) -> Result<String> {
    let op = DiagonalOperator::artificial();
    let rows: Vec<Result<String>> = jobs(&fig14_alphas(opts), &fig14_ns(opts))
        .par_iter()
        .map(|&(alpha, n)| {
            let o = order(alpha)?;
            Ok(format!(
                "{},{n},{},{},{}",
                num(alpha),
                num(se_sup(o, n, PI / 4.0, &op)?),
                num(se_sup(o, n, FRAC_PI_2, &op)?),
                num(se_bound(o, n, FRAC_PI_2)?.value)
            ))
        })
        .collect();
    Ok(format!("alpha,n,err_d_pi4,err_d_pi2,bound\n{}", collect_rows(rows)?))
}

/// DE error at one spectral point against both scalar estimators.
fn figure2(opts: &Options) -> Result<String> {
    let o = order(opts.alpha.unwrap_or(0.5))?;
    let r = safety(opts);
    let lambda = single_lambda(opts)?.unwrap_or(1e12);
    check_lambda(lambda)?;
    let tau = opts.tau.unwrap_or(100.0);
    let d = match strip_override(opts)? {
        Some(d) => d,
        None => strip_halfwidth(lambda, tau, r)?,
    };
    let ns = if opts.n.is_empty() {
        (5..=200).step_by(5).collect()
    } else {
        opts.n.clone()
    };
    let rows: Vec<Result<String>> = ns
        .par_iter()
        .map(|&n| {
            let cfg = de_config_with(n, o, r, Some(tau), StripChoice::Fixed(d))?;
            let err = cfg.rule()?.error_at(lambda);
            Ok(format!(
                "{n},{},{},{},{}",
                cfg.inversions(),
                num(err),
                num(de_estimate_scalar(lambda, tau, n, o, r)?.value),
                num(de_estimate_okayama(lambda, tau, n, o, r)?.value)
            ))
        })
        .collect();
    Ok(format!(
        "# alpha={} lambda={} tau={} d={}\nn,inversions,err_de,ere,ere2\n{}",
        num(o.alpha()),
        num(lambda),
        num(tau),
        num(d),
        collect_rows(rows)?
    ))
}

/// `phi(lambda, tau*)` on a log grid and the closed-form markers.
fn figure3(opts: &Options) -> Result<String> {
    const POINTS: usize = 2000;
    let o = order(opts.alpha.unwrap_or(0.5))?;
    let n = single_n(opts)?.unwrap_or(40);
    let r = safety(opts);
    let tau = match opts.tau {
        Some(t) => t,
        None => tau_star(n, o, r)?,
    };
    let grid: Vec<Result<(f64, f64)>> = (0..POINTS)
        .into_par_iter()
        .map(|k| {
            let lambda = 10f64.powf(20.0 * k as f64 / (POINTS - 1) as f64);
            Ok((lambda, de_phi(lambda, tau, n, o, r)?))
        })
        .collect();
    let grid = grid.into_iter().collect::<Result<Vec<_>>>()?;
    // the peak sought is the one beyond tau
    let argmax = grid
        .iter()
        .filter(|p| p.0 >= tau)
        .fold((tau, f64::NEG_INFINITY), |best, p| if p.1 > best.1 { *p } else { best });
    let star = lambda_star(n, o, tau, r)?;

    let mut out = format!(
        "# alpha={} n={n} r={} tau_star={}\nkind,lambda,phi\n",
        num(o.alpha()),
        num(r),
        num(tau)
    );
    for (lambda, phi) in &grid {
        writeln!(out, "grid,{},{}", num(*lambda), num(*phi)).unwrap();
    }
    let markers = [
        ("tau_star", tau, de_phi(tau, tau, n, o, r)?),
        ("argmax", argmax.0, argmax.1),
        ("lambda_star", star, de_phi(star, tau, n, o, r)?),
        ("errm2", star, de_phi_at_lambda_star(tau, n, o, r)?),
        ("t", 1.0, de_phi_at_one(tau, n, o, r)?),
    ];
    for (kind, lambda, phi) in markers {
        writeln!(out, "{kind},{},{}", num(lambda), num(phi)).unwrap();
    }
    Ok(out)
}

/// DE against SE on the artificial operator, with the DE operator estimate.
fn figure4(opts: &Options) -> Result<String> {
    let op = DiagonalOperator::artificial();
    let r = safety(opts);
    let rows: Vec<Result<String>> = jobs(&fig14_alphas(opts), &fig14_ns(opts))
        .par_iter()
        .map(|&(alpha, n)| {
            let o = order(alpha)?;
            let de = de_config_with(n, o, r, None, StripChoice::AtLambda(1.0))?.rule()?;
            Ok(format!(
                "{},{n},{},{},{}",
                num(alpha),
                num(operator_error_sup(&de, &op)),
                num(se_sup(o, n, FRAC_PI_2, &op)?),
                num(de_operator_estimate(n, o, r)?.value)
            ))
        })
        .collect();
    Ok(format!("alpha,n,err_de,err_se,fest\n{}", collect_rows(rows)?))
}
