use nalgebra::{DVector, SymmetricEigen};

use crate::error::{FracpowError, Result};
use crate::kernel::FractionalOrder;

use super::DenseSpdOperator;

/// Largest dimension the eigendecomposition reference is meant for.
pub const ORACLE_MAX_DIM: usize = 2000;

/// `L^{-alpha} g = sum_j mu_j^{-alpha} <g, phi_j> phi_j` from a full
/// symmetric eigendecomposition. Reference only.
pub fn spectral_oracle(op: &DenseSpdOperator, order: FractionalOrder, g: &[f64]) -> Result<Vec<f64>> {
    let matrix = op.matrix();
    let dim = matrix.nrows();
    if dim > ORACLE_MAX_DIM {
        return Err(FracpowError::Oracle(format!(
            "dimension {dim} exceeds the oracle limit {ORACLE_MAX_DIM}"
        )));
    }
    if g.len() != dim {
        return Err(FracpowError::DimensionMismatch {
            expected: dim,
            found: g.len(),
        });
    }
    let eig = SymmetricEigen::try_new(matrix.clone(), f64::EPSILON, 0)
        .ok_or_else(|| FracpowError::Oracle("symmetric eigensolver did not converge".into()))?;
    if let Some(&bad) = eig.eigenvalues.iter().find(|v| !(**v > 0.0)) {
        return Err(FracpowError::Oracle(format!("nonpositive eigenvalue {bad:e}")));
    }
    let g = DVector::from_column_slice(g);
    // V diag(mu^{-alpha}) V^T g
    let mut coeffs = eig.eigenvectors.transpose() * g;
    for (c, &mu) in coeffs.iter_mut().zip(eig.eigenvalues.iter()) {
        *c *= order.power(mu);
    }
    Ok((eig.eigenvectors * coeffs).as_slice().to_vec())
}
