//! Operator backends against the eigendecomposition oracle.

use std::f64::consts::{FRAC_PI_2, PI};

use fracpow::estimates::{de_operator_estimate, se_bound};
use fracpow::io::{parse_matrix_market, read_matrix_market, read_vector, write_vector};
use fracpow::operator::{CsrMatrix, IterativeOperator};
use fracpow::params::{de_config, se_params_from_n, DEFAULT_SAFETY};
use fracpow::{
    apply_fracpow, operator_error_sup, scaled_fracpow, spectral_oracle, DenseSpdOperator, DiagonalOperator,
    FracpowError, FractionalOrder, SolveFailure,
};
use nalgebra::DMatrix;

/// Resolvable operator error in double precision for these sizes.
const FLOOR: f64 = 1e-14;

fn order(alpha: f64) -> FractionalOrder {
    FractionalOrder::new(alpha).unwrap()
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

fn rhs(dim: usize) -> Vec<f64> {
    (0..dim).map(|i| ((i + 1) as f64 * 0.7).sin()).collect()
}

/// `tridiag(-1, 2, -1)` as triplets.
fn laplacian_triplets(dim: usize) -> Vec<(usize, usize, f64)> {
    let mut t = Vec::new();
    for i in 0..dim {
        t.push((i, i, 2.0));
        if i + 1 < dim {
            t.push((i, i + 1, -1.0));
            t.push((i + 1, i, -1.0));
        }
    }
    t
}

fn laplacian_lambda_min(dim: usize) -> f64 {
    4.0 * (PI / (2.0 * (dim + 1) as f64)).sin().powi(2)
}

/// `Q diag(mu) Q^T` with `mu` log-spaced in `[1, kappa]` and `Q` from a
/// seeded QR factorization.
fn random_spd(dim: usize, kappa: f64, seed: u64) -> DMatrix<f64> {
    let mut state = seed;
    let mut next = || {
        state = state
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
    };
    let q = DMatrix::from_fn(dim, dim, |_, _| next()).qr().q();
    let mu = DMatrix::from_diagonal(&nalgebra::DVector::from_fn(dim, |i, _| {
        kappa.powf(i as f64 / (dim - 1) as f64)
    }));
    let a = &q * mu * q.transpose();
    (&a + a.transpose()) * 0.5
}

fn dense_solve(a: &DMatrix<f64>, g: &[f64]) -> Vec<f64> {
    let chol = a.clone().cholesky().unwrap();
    chol.solve(&nalgebra::DVector::from_column_slice(g)).as_slice().to_vec()
}

#[test]
fn laplacian_matches_oracle_within_estimate() {
    let (dim, o) = (50, order(0.75));
    let lambda_min = laplacian_lambda_min(dim);
    let triplets: Vec<_> = laplacian_triplets(dim)
        .into_iter()
        .map(|(i, j, v)| (i, j, v / lambda_min))
        .collect();
    let op = DenseSpdOperator::from_triplets(dim, &triplets, 1.0).unwrap();
    let rule = de_config(100, o, DEFAULT_SAFETY).unwrap().rule().unwrap();
    let fest = de_operator_estimate(100, o, DEFAULT_SAFETY).unwrap().value;
    let g = rhs(dim);
    let exact = spectral_oracle(&op, o, &g).unwrap();
    let got = apply_fracpow(&rule, &op, &g).unwrap();
    assert_eq!(got.terms_applied, rule.active_terms());
    assert!(got.terms_applied <= rule.inversions());
    let err = dist(&got.vector, &exact);
    assert!(err <= (100.0 * fest).max(FLOOR) * norm(&g), "{err:e}");
}

#[test]
fn unscaled_laplacian_through_certificate() {
    let (dim, o) = (30, order(0.5));
    let lambda_min = laplacian_lambda_min(dim);
    let op = DenseSpdOperator::from_triplets(dim, &laplacian_triplets(dim), lambda_min).unwrap();
    let rule = de_config(80, o, DEFAULT_SAFETY).unwrap().rule().unwrap();
    let g = rhs(dim);
    assert!(matches!(
        apply_fracpow(&rule, &op, &g),
        Err(FracpowError::SpectrumBound { .. })
    ));
    let got = scaled_fracpow(&rule, &op, lambda_min, &g).unwrap().vector;
    let exact = spectral_oracle(&op, o, &g).unwrap();
    assert!(dist(&got, &exact) <= 1e-9 * norm(&exact), "{:e}", dist(&got, &exact));
}

#[test]
fn oracle_semigroup() {
    let a = random_spd(50, 1e3, 7);
    let op = DenseSpdOperator::new(a.clone(), 1.0).unwrap();
    let g = rhs(50);
    for alpha in [0.25, 0.5, 0.8] {
        let half = spectral_oracle(&op, order(alpha), &g).unwrap();
        let full = spectral_oracle(&op, order(1.0 - alpha), &half).unwrap();
        let want = dense_solve(&a, &g);
        assert!(dist(&full, &want) <= 1e-10 * norm(&want), "alpha={alpha}");
    }
}

#[test]
fn quadrature_semigroup() {
    let a = random_spd(50, 1e3, 11);
    let op = DenseSpdOperator::new(a.clone(), 1.0).unwrap();
    let g = rhs(50);
    let want = dense_solve(&a, &g);
    let n = 120;
    for alpha in [0.3, 0.5] {
        let (p, q) = (order(alpha), order(1.0 - alpha));
        let rp = de_config(n, p, DEFAULT_SAFETY).unwrap().rule().unwrap();
        let rq = de_config(n, q, DEFAULT_SAFETY).unwrap().rule().unwrap();
        let inner = apply_fracpow(&rq, &op, &g).unwrap().vector;
        let got = apply_fracpow(&rp, &op, &inner).unwrap().vector;
        let estimates = de_operator_estimate(n, p, DEFAULT_SAFETY).unwrap().value
            + de_operator_estimate(n, q, DEFAULT_SAFETY).unwrap().value;
        let err = dist(&got, &want);
        assert!(
            err <= (10.0 * estimates).max(FLOOR) * norm(&g),
            "alpha={alpha}: {err:e} vs {estimates:e}"
        );
    }
}

#[test]
fn cg_matches_dense_under_subordinated_tolerance() {
    let (dim, o) = (60, order(0.5));
    let lambda_min = laplacian_lambda_min(dim);
    let triplets: Vec<_> = laplacian_triplets(dim)
        .into_iter()
        .map(|(i, j, v)| (i, j, v / lambda_min))
        .collect();
    let n = 60;
    let rule = de_config(n, o, DEFAULT_SAFETY).unwrap().rule().unwrap();
    let fest = de_operator_estimate(n, o, DEFAULT_SAFETY).unwrap().value;
    let dense = DenseSpdOperator::from_triplets(dim, &triplets, 1.0).unwrap();
    let tol = 1e-12f64.min(0.01 * fest);
    let cg = IterativeOperator::new(CsrMatrix::from_triplets(dim, &triplets).unwrap(), 1.0, tol, 40 * dim).unwrap();
    let g = rhs(dim);
    let exact = spectral_oracle(&dense, o, &g).unwrap();
    let dense_err = dist(&apply_fracpow(&rule, &dense, &g).unwrap().vector, &exact);
    let out = apply_fracpow(&rule, &cg, &g).unwrap();
    let cg_err = dist(&out.vector, &exact);
    assert!(
        cg_err <= 1.1 * dense_err.max(FLOOR * norm(&g)),
        "{cg_err:e} vs {dense_err:e}"
    );
    assert!(out.solver_stats.iter().all(|s| s.stats.iterations <= 40 * dim));
}

#[test]
fn cg_failure_is_reported() {
    let dim = 200;
    let csr = CsrMatrix::from_triplets(dim, &laplacian_triplets(dim)).unwrap();
    let cg = IterativeOperator::new(csr, 1.0, 1e-14, 3).unwrap();
    let rule = se_params_from_n(order(0.5), 20, FRAC_PI_2).unwrap().rule().unwrap();
    match apply_fracpow(&rule, &cg, &rhs(dim)) {
        Err(FracpowError::Solve {
            reason: SolveFailure::NotConverged { iterations, .. },
            ..
        }) => assert!(iterations <= 3),
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn identity_returns_input() {
    let op = DenseSpdOperator::new(DMatrix::identity(5, 5), 1.0).unwrap();
    let o = order(0.5);
    let n = 157;
    let rule = se_params_from_n(o, n, FRAC_PI_2).unwrap().rule().unwrap();
    let got = apply_fracpow(&rule, &op, &[1.0; 5]).unwrap().vector;
    let bound = se_bound(o, n, FRAC_PI_2).unwrap().value;
    assert!(got.iter().all(|v| (v - 1.0).abs() <= bound));
}

#[test]
fn artificial_operator_se_example() {
    let o = order(0.5);
    let rule = se_params_from_n(o, 157, FRAC_PI_2).unwrap().rule().unwrap();
    let sup = operator_error_sup(&rule, &DiagonalOperator::artificial());
    assert!(sup <= 3e-12, "{sup:e}");
    assert!(sup <= se_bound(o, 157, FRAC_PI_2).unwrap().value);
}

#[test]
fn io_round_trip() {
    let dir = std::env::temp_dir().join(format!("fracpow-io-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let dim = 8;
    let mut text = format!(
        "%%MatrixMarket matrix coordinate real symmetric\n{dim} {dim} {}\n",
        2 * dim - 1
    );
    for i in 1..=dim {
        text.push_str(&format!("{i} {i} 2\n"));
        if i < dim {
            text.push_str(&format!("{} {i} -1\n", i + 1));
        }
    }
    let path = dir.join("lap.mtx");
    std::fs::write(&path, &text).unwrap();
    let m = read_matrix_market(&path).unwrap();
    assert_eq!(m.dim, dim);
    let a = DenseSpdOperator::from_triplets(m.dim, &m.triplets, 0.1).unwrap();
    let b = DenseSpdOperator::from_triplets(dim, &laplacian_triplets(dim), 0.1).unwrap();
    assert_eq!(a.matrix(), b.matrix());

    let v = rhs(dim);
    let vpath = dir.join("g.txt");
    write_vector(&vpath, &v).unwrap();
    assert_eq!(read_vector(&vpath).unwrap(), v);
    assert!(matches!(
        read_vector(&dir.join("missing.txt")),
        Err(FracpowError::Io(_))
    ));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn loaded_matrix_dimension_mismatch() {
    let m = parse_matrix_market("%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1\n2 2 1\n").unwrap();
    let op = DenseSpdOperator::from_triplets(m.dim, &m.triplets, 1.0).unwrap();
    let rule = de_config(40, order(0.5), DEFAULT_SAFETY).unwrap().rule().unwrap();
    assert!(matches!(
        apply_fracpow(&rule, &op, &[1.0; 3]),
        Err(FracpowError::DimensionMismatch { expected: 2, found: 3 })
    ));
}
