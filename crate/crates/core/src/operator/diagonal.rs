use crate::error::{domain, Result};

use super::{ShiftedSolveOperator, SolveStats};

/// `L = diag(lambda_1, ..., lambda_n)`; shifted solves are exact divisions.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalOperator {
    eigenvalues: Vec<f64>,
    bound: f64,
}

impl DiagonalOperator {
    /// Certificate is the smallest eigenvalue.
    pub fn new(eigenvalues: Vec<f64>) -> Result<Self> {
        let bound = eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
        Self::with_bound(eigenvalues, bound)
    }

    /// Explicit certificate; it must not exceed the smallest eigenvalue.
    pub fn with_bound(eigenvalues: Vec<f64>, bound: f64) -> Result<Self> {
        if eigenvalues.is_empty() {
            return Err(domain("dim", 0.0, "dim >= 1"));
        }
        if let Some(&bad) = eigenvalues.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
            return Err(domain("eigenvalue", bad, "finite eigenvalue > 0"));
        }
        let min = eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
        if bound > min {
            return Err(domain("spectrum_lower_bound", bound, "bound <= smallest eigenvalue"));
        }
        Ok(Self { eigenvalues, bound })
    }

    /// `[diag(1, 2, ..., 100)]^8`, spectrum in `[1, 1e16]`.
    pub fn artificial() -> Self {
        let eigenvalues = (1..=100).map(|j| (j as f64).powi(8)).collect();
        Self {
            eigenvalues,
            bound: 1.0,
        }
    }

    /// Diagonal of a triplet list; any nonzero off-diagonal entry is rejected.
    pub fn from_triplets(dim: usize, triplets: &[(usize, usize, f64)]) -> Result<Self> {
        let mut diag = vec![0.0; dim];
        for &(i, j, v) in triplets {
            if i != j {
                if v != 0.0 {
                    return Err(domain("off-diagonal entry", v, "zero for a diagonal operator"));
                }
                continue;
            }
            diag[i] += v;
        }
        Self::new(diag)
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }
}

impl ShiftedSolveOperator for DiagonalOperator {
    fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    fn spectrum_lower_bound(&self) -> f64 {
        self.bound
    }

    fn solve_shifted(&self, shift: f64, v: &[f64]) -> Result<(Vec<f64>, SolveStats)> {
        let x = v
            .iter()
            .zip(&self.eigenvalues)
            .map(|(vi, lambda)| vi / (shift + lambda))
            .collect();
        Ok((x, SolveStats::default()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn artificial_spectrum() {
        let op = DiagonalOperator::artificial();
        assert_eq!(op.dim(), 100);
        assert_eq!(op.eigenvalues()[0], 1.0);
        assert_eq!(op.eigenvalues()[99], 1e16);
    }

    #[test]
    fn exact_division() {
        let op = DiagonalOperator::new(vec![1.0, 4.0]).unwrap();
        let (x, _) = op.solve_shifted(1.0, &[2.0, 10.0]).unwrap();
        assert_eq!(x, vec![1.0, 2.0]);
    }

    #[test]
    fn validation() {
        assert!(DiagonalOperator::new(vec![]).is_err());
        assert!(DiagonalOperator::new(vec![1.0, -1.0]).is_err());
        assert!(DiagonalOperator::with_bound(vec![2.0, 3.0], 2.5).is_err());
        assert!(DiagonalOperator::from_triplets(2, &[(0, 0, 1.0), (0, 1, 0.5)]).is_err());
        let op = DiagonalOperator::from_triplets(2, &[(0, 0, 1.0), (1, 1, 3.0), (0, 1, 0.0)]).unwrap();
        assert_eq!(op.eigenvalues(), &[1.0, 3.0]);
    }
}
