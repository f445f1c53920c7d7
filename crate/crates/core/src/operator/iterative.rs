use std::collections::HashMap;

use crate::error::{domain, FracpowError, Result, SolveFailure};

use super::{ShiftedSolveOperator, SolveStats, SYMMETRY_TOLERANCE};

/// Compressed sparse row matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    dim: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Square matrix from triplets; duplicate entries are summed.
    pub fn from_triplets(dim: usize, triplets: &[(usize, usize, f64)]) -> Result<Self> {
        let mut merged: HashMap<(usize, usize), f64> = HashMap::with_capacity(triplets.len());
        for &(i, j, v) in triplets {
            if i >= dim || j >= dim {
                return Err(FracpowError::DimensionMismatch {
                    expected: dim,
                    found: i.max(j) + 1,
                });
            }
            *merged.entry((i, j)).or_insert(0.0) += v;
        }
        let mut entries: Vec<((usize, usize), f64)> = merged.into_iter().collect();
        entries.sort_unstable_by_key(|&(key, _)| key);

        let mut row_ptr = vec![0; dim + 1];
        let mut col_idx = Vec::with_capacity(entries.len());
        let mut values = Vec::with_capacity(entries.len());
        for &((i, j), v) in &entries {
            row_ptr[i + 1] += 1;
            col_idx.push(j);
            values.push(v);
        }
        for i in 0..dim {
            row_ptr[i + 1] += row_ptr[i];
        }
        Ok(Self {
            dim,
            row_ptr,
            col_idx,
            values,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let row = &self.col_idx[self.row_ptr[i]..self.row_ptr[i + 1]];
        match row.binary_search(&j) {
            Ok(k) => self.values[self.row_ptr[i] + k],
            Err(_) => 0.0,
        }
    }

    /// `y = (shift I + A) x`.
    pub fn shifted_matvec(&self, shift: f64, x: &[f64], y: &mut [f64]) {
        for i in 0..self.dim {
            let mut acc = shift * x[i];
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.values[k] * x[self.col_idx[k]];
            }
            y[i] = acc;
        }
    }

    /// Largest relative asymmetry, with position.
    pub fn asymmetry(&self) -> (f64, usize, usize) {
        let scale = self
            .values
            .iter()
            .fold(0.0f64, |m, v| m.max(v.abs()))
            .max(f64::MIN_POSITIVE);
        let mut worst = (0.0, 0, 0);
        for i in 0..self.dim {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                let j = self.col_idx[k];
                let defect = (self.values[k] - self.get(j, i)).abs() / scale;
                if defect > worst.0 {
                    worst = (defect, i, j);
                }
            }
        }
        worst
    }

    /// Largest absolute row sum, `||A||_inf`.
    pub fn norm_inf(&self) -> f64 {
        (0..self.dim)
            .map(|i| {
                self.values[self.row_ptr[i]..self.row_ptr[i + 1]]
                    .iter()
                    .map(|v| v.abs())
                    .sum::<f64>()
            })
            .fold(0.0, f64::max)
    }

    pub fn to_triplets(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::with_capacity(self.nnz());
        for i in 0..self.dim {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                out.push((i, self.col_idx[k], self.values[k]));
            }
        }
        out
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[derive(Debug, Clone, PartialEq)]
pub struct CgOutcome {
    pub x: Vec<f64>,
    pub iterations: usize,
    /// True relative residual `||b - (sI + A) x|| / ||b||`.
    pub relative_residual: f64,
    pub converged: bool,
}

/// Normwise backward error at which a solve counts as exact in double
/// precision, whatever tolerance was requested.
pub const ROUNDOFF_BACKWARD_ERROR: f64 = 64.0 * f64::EPSILON;

/// Unpreconditioned CG on `(shift I + A) x = b` from `x = 0`.
///
/// Converged when the true relative residual is at most `tolerance`, or
/// when the backward error `||r|| / (||sI + A|| ||x|| + ||b||)` has reached
/// round-off. When the recurrence residual drifts below the target first,
/// CG restarts from the current iterate.
pub fn conjugate_gradient(a: &CsrMatrix, shift: f64, b: &[f64], tolerance: f64, max_iterations: usize) -> CgOutcome {
    let n = b.len();
    let b_norm = dot(b, b).sqrt();
    let mut x = vec![0.0; n];
    if b_norm == 0.0 {
        return CgOutcome {
            x,
            iterations: 0,
            relative_residual: 0.0,
            converged: true,
        };
    }
    let a_norm = shift.abs() + a.norm_inf();
    let target = |x: &[f64]| (tolerance * b_norm).max(ROUNDOFF_BACKWARD_ERROR * (a_norm * dot(x, x).sqrt() + b_norm));
    let mut ap = vec![0.0; n];
    let mut iterations = 0;
    loop {
        // r = b - (sI + A) x
        a.shifted_matvec(shift, &x, &mut ap);
        let mut r: Vec<f64> = b.iter().zip(&ap).map(|(bi, yi)| bi - yi).collect();
        let mut rr = dot(&r, &r);
        let converged = rr.sqrt() <= target(&x);
        if converged || iterations >= max_iterations {
            return CgOutcome {
                x,
                iterations,
                relative_residual: rr.sqrt() / b_norm,
                converged,
            };
        }
        let mut p = r.clone();
        while iterations < max_iterations {
            a.shifted_matvec(shift, &p, &mut ap);
            let pap = dot(&p, &ap);
            if !(pap > 0.0) {
                // loss of positive definiteness
                return CgOutcome {
                    x,
                    iterations,
                    relative_residual: rr.sqrt() / b_norm,
                    converged: false,
                };
            }
            let step = rr / pap;
            for i in 0..n {
                x[i] += step * p[i];
                r[i] -= step * ap[i];
            }
            iterations += 1;
            let rr_next = dot(&r, &r);
            if rr_next.sqrt() <= target(&x) {
                break;
            }
            let beta = rr_next / rr;
            for i in 0..n {
                p[i] = r[i] + beta * p[i];
            }
            rr = rr_next;
        }
    }
}

/// Sparse SPD matrix with CG shifted solves.
#[derive(Debug, Clone)]
pub struct IterativeOperator {
    matrix: CsrMatrix,
    bound: f64,
    cg_tolerance: f64,
    cg_max_iterations: usize,
}

impl IterativeOperator {
    pub fn new(
        matrix: CsrMatrix,
        spectrum_lower_bound: f64,
        cg_tolerance: f64,
        cg_max_iterations: usize,
    ) -> Result<Self> {
        if !(cg_tolerance > 0.0 && cg_tolerance < 1.0) {
            return Err(domain("cg_tolerance", cg_tolerance, "0 < tol < 1"));
        }
        if matrix.dim() == 0 {
            return Err(domain("dim", 0.0, "dim >= 1"));
        }
        let (defect, row, col) = matrix.asymmetry();
        if defect > SYMMETRY_TOLERANCE {
            return Err(FracpowError::NotSymmetric { row, col, defect });
        }
        Ok(Self {
            matrix,
            bound: spectrum_lower_bound,
            cg_tolerance,
            cg_max_iterations,
        })
    }

    pub fn matrix(&self) -> &CsrMatrix {
        &self.matrix
    }

    pub fn cg_tolerance(&self) -> f64 {
        self.cg_tolerance
    }

    pub fn with_tolerance(mut self, tolerance: f64) -> Result<Self> {
        if !(tolerance > 0.0 && tolerance < 1.0) {
            return Err(domain("cg_tolerance", tolerance, "0 < tol < 1"));
        }
        self.cg_tolerance = tolerance;
        Ok(self)
    }
}

impl ShiftedSolveOperator for IterativeOperator {
    fn dim(&self) -> usize {
        self.matrix.dim()
    }

    fn spectrum_lower_bound(&self) -> f64 {
        self.bound
    }

    fn solve_shifted(&self, shift: f64, v: &[f64]) -> Result<(Vec<f64>, SolveStats)> {
        let out = conjugate_gradient(&self.matrix, shift, v, self.cg_tolerance, self.cg_max_iterations);
        if !out.converged {
            return Err(FracpowError::Solve {
                shift,
                reason: SolveFailure::NotConverged {
                    iterations: out.iterations,
                    residual: out.relative_residual,
                },
            });
        }
        Ok((
            out.x,
            SolveStats {
                iterations: out.iterations,
                relative_residual: out.relative_residual,
            },
        ))
    }
}
