use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::error::{domain, FracpowError, Result, SolveFailure};

use super::{ShiftedSolveOperator, SolveStats, SYMMETRY_TOLERANCE};

type Factor = Arc<Cholesky<f64, Dyn>>;

/// Dense SPD matrix solved by one Cholesky factorization per shift.
///
/// Factorizations are cached by the bit pattern of the shift, so repeated
/// applications of the same rule factor only once.
#[derive(Debug)]
pub struct DenseSpdOperator {
    matrix: DMatrix<f64>,
    bound: f64,
    cache: Mutex<HashMap<u64, Factor>>,
}

/// Largest relative asymmetry `|a_ij - a_ji| / max|a|`, with its position.
pub(crate) fn asymmetry(matrix: &DMatrix<f64>) -> (f64, usize, usize) {
    let scale = matrix.amax().max(f64::MIN_POSITIVE);
    let mut worst = (0.0, 0, 0);
    for j in 0..matrix.ncols() {
        for i in (j + 1)..matrix.nrows() {
            let defect = (matrix[(i, j)] - matrix[(j, i)]).abs() / scale;
            if defect > worst.0 {
                worst = (defect, i, j);
            }
        }
    }
    worst
}

impl DenseSpdOperator {
    /// Verifies symmetry to `1e-12` relative and stores `(A + A^T) / 2`.
    pub fn new(matrix: DMatrix<f64>, spectrum_lower_bound: f64) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(FracpowError::DimensionMismatch {
                expected: matrix.nrows(),
                found: matrix.ncols(),
            });
        }
        if matrix.nrows() == 0 {
            return Err(domain("dim", 0.0, "dim >= 1"));
        }
        if matrix.iter().any(|v| !v.is_finite()) {
            return Err(domain("matrix entry", f64::NAN, "finite entries"));
        }
        let (defect, row, col) = asymmetry(&matrix);
        if defect > SYMMETRY_TOLERANCE {
            return Err(FracpowError::NotSymmetric { row, col, defect });
        }
        let matrix = (&matrix + matrix.transpose()) * 0.5;
        Ok(Self {
            matrix,
            bound: spectrum_lower_bound,
            cache: Mutex::new(HashMap::new()),
        })
    }

    /// Assembles from `(row, col, value)` triplets; duplicates are summed.
    pub fn from_triplets(dim: usize, triplets: &[(usize, usize, f64)], spectrum_lower_bound: f64) -> Result<Self> {
        let mut matrix = DMatrix::zeros(dim, dim);
        for &(i, j, v) in triplets {
            matrix[(i, j)] += v;
        }
        Self::new(matrix, spectrum_lower_bound)
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    fn factor(&self, shift: f64) -> Result<Factor> {
        let key = shift.to_bits();
        if let Some(f) = self.cache.lock().expect("factor cache poisoned").get(&key) {
            return Ok(Arc::clone(f));
        }
        let mut shifted = self.matrix.clone();
        for i in 0..shifted.nrows() {
            shifted[(i, i)] += shift;
        }
        let factor = Cholesky::new(shifted).ok_or(FracpowError::Solve {
            shift,
            reason: SolveFailure::Factorization,
        })?;
        let factor = Arc::new(factor);
        self.cache
            .lock()
            .expect("factor cache poisoned")
            .insert(key, Arc::clone(&factor));
        Ok(factor)
    }

    pub fn cached_factorizations(&self) -> usize {
        self.cache.lock().expect("factor cache poisoned").len()
    }
}

impl ShiftedSolveOperator for DenseSpdOperator {
    fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    fn spectrum_lower_bound(&self) -> f64 {
        self.bound
    }

    fn solve_shifted(&self, shift: f64, v: &[f64]) -> Result<(Vec<f64>, SolveStats)> {
        let factor = self.factor(shift)?;
        let x = factor.solve(&DVector::from_column_slice(v));
        Ok((x.as_slice().to_vec(), SolveStats::default()))
    }
}
