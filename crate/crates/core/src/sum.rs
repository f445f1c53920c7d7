//! Compensated (Neumaier) summation.
//!
//! Terms must be fed in a fixed order for the result to be reproducible.

/// Scalar Neumaier accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.compensation += (self.sum - t) + value;
        } else {
            self.compensation += (value - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

/// Componentwise Neumaier accumulator for vectors of fixed length.
#[derive(Debug, Clone)]
pub struct CompensatedVecSum {
    parts: Vec<CompensatedSum>,
}

impl CompensatedVecSum {
    pub fn zeros(len: usize) -> Self {
        Self {
            parts: vec![CompensatedSum::new(); len],
        }
    }

    /// Adds `scale * v`.
    pub fn add_scaled(&mut self, scale: f64, v: &[f64]) {
        debug_assert_eq!(v.len(), self.parts.len());
        for (acc, &x) in self.parts.iter_mut().zip(v) {
            acc.add(scale * x);
        }
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.parts.iter().map(CompensatedSum::value).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_cancelled_small_terms() {
        let mut acc = CompensatedSum::new();
        for v in [1.0, 1e100, 1.0, -1e100] {
            acc.add(v);
        }
        assert_eq!(acc.value(), 2.0);
    }

    #[test]
    fn many_small_terms() {
        let mut acc = CompensatedSum::new();
        let mut naive = 0.0;
        for _ in 0..1_000_000 {
            acc.add(0.1);
            naive += 0.1;
        }
        assert!((acc.value() - 100_000.0).abs() < 1e-9);
        assert!((naive - 100_000.0_f64).abs() > (acc.value() - 100_000.0).abs());
    }

    #[test]
    fn vector_accumulation() {
        let mut acc = CompensatedVecSum::zeros(2);
        acc.add_scaled(2.0, &[1.0, -1.0]);
        acc.add_scaled(0.5, &[2.0, 4.0]);
        assert_eq!(acc.into_vec(), vec![3.0, 0.0]);
    }
}
