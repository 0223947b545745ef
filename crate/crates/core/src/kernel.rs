//! Matrix kernel sequences `K: Z_+ -> R^{d x d}` for the discrete equation.

use crate::error::{Error, Result};
use crate::Matrix;

/// Geometric tail `K(n) = base * ratio^(n - start)` for `n >= start`.
#[derive(Debug, Clone, PartialEq)]
pub struct GeometricTail {
    pub base: Matrix,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KernelSeq {
    dim: usize,
    explicit: Vec<Matrix>,
    tail: Option<GeometricTail>,
}

impl KernelSeq {
    /// Finitely supported kernel; `K(n) = 0` beyond the listed entries.
    pub fn finite(dim: usize, explicit: Vec<Matrix>) -> Result<Self> {
        Self::new(dim, explicit, None)
    }

    pub fn new(dim: usize, explicit: Vec<Matrix>, tail: Option<GeometricTail>) -> Result<Self> {
        for m in explicit.iter().chain(tail.as_ref().map(|t| &t.base)) {
            if m.nrows() != dim || m.ncols() != dim {
                return Err(Error::DimensionMismatch {
                    what: "kernel entry",
                    expected: dim * dim,
                    found: m.nrows() * m.ncols(),
                });
            }
            if m.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidParameter("kernel entry is not finite".into()));
            }
        }
        if let Some(t) = &tail {
            if !(t.ratio.is_finite() && t.ratio.abs() < 1.0) {
                return Err(Error::InvalidParameter(format!(
                    "geometric tail ratio must lie in (-1, 1), got {}",
                    t.ratio
                )));
            }
        }
        Ok(Self { dim, explicit, tail })
    }

    pub fn zero(dim: usize) -> Self {
        Self {
            dim,
            explicit: Vec::new(),
            tail: None,
        }
    }

    /// Scalar kernel with `K(0) = k0` and zero elsewhere.
    pub fn scalar_head(k0: f64) -> Self {
        Self {
            dim: 1,
            explicit: vec![Matrix::from_element(1, 1, k0)],
            tail: None,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn explicit(&self) -> &[Matrix] {
        &self.explicit
    }

    pub fn tail(&self) -> Option<&GeometricTail> {
        self.tail.as_ref()
    }

    pub fn at(&self, n: usize) -> Matrix {
        if let Some(m) = self.explicit.get(n) {
            return m.clone();
        }
        match &self.tail {
            Some(t) => &t.base * t.ratio.powi((n - self.explicit.len()) as i32),
            None => Matrix::zeros(self.dim, self.dim),
        }
    }

    /// `K(0..len)`, materialised.
    pub fn materialize(&self, len: usize) -> Vec<Matrix> {
        (0..len).map(|n| self.at(n)).collect()
    }

    /// Componentwise `Σ_n |K_ij(n)|`, exact for the explicit part and the
    /// geometric tail.
    pub fn abs_sum_bound(&self) -> Matrix {
        let mut acc = Matrix::zeros(self.dim, self.dim);
        for m in &self.explicit {
            acc += m.abs();
        }
        if let Some(t) = &self.tail {
            acc += t.base.abs() / (1.0 - t.ratio.abs());
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tail_values_and_bound() {
        let k = KernelSeq::new(
            1,
            vec![Matrix::from_element(1, 1, -0.5)],
            Some(GeometricTail {
                base: Matrix::from_element(1, 1, 0.1),
                ratio: -0.5,
            }),
        )
        .unwrap();
        assert_eq!(k.at(0)[(0, 0)], -0.5);
        assert_eq!(k.at(1)[(0, 0)], 0.1);
        assert_eq!(k.at(3)[(0, 0)], 0.025);
        assert!((k.abs_sum_bound()[(0, 0)] - 0.7).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_shapes_and_ratios() {
        assert!(KernelSeq::finite(2, vec![Matrix::zeros(1, 1)]).is_err());
        assert!(KernelSeq::new(
            1,
            vec![],
            Some(GeometricTail { base: Matrix::zeros(1, 1), ratio: 1.0 })
        )
        .is_err());
    }
}
