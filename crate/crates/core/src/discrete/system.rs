use crate::error::{Error, Result};
use crate::kernel::KernelSeq;
use crate::noise::NoiseSpec;
use crate::{Matrix, Vector};

/// Matrix-valued sequence `n -> A(n)`.
#[derive(Debug, Clone, PartialEq)]
pub enum MatrixSeq {
    Zero { rows: usize, cols: usize },
    Constant(Matrix),
    /// `base * ratio^n`.
    Geometric { base: Matrix, ratio: f64 },
    /// Listed values, zero afterwards.
    Explicit { rows: usize, cols: usize, values: Vec<Matrix> },
}

impl MatrixSeq {
    pub fn shape(&self) -> (usize, usize) {
        match self {
            MatrixSeq::Zero { rows, cols } | MatrixSeq::Explicit { rows, cols, .. } => (*rows, *cols),
            MatrixSeq::Constant(m) | MatrixSeq::Geometric { base: m, .. } => (m.nrows(), m.ncols()),
        }
    }

    pub fn at(&self, n: usize) -> Matrix {
        let (r, c) = self.shape();
        match self {
            MatrixSeq::Zero { .. } => Matrix::zeros(r, c),
            MatrixSeq::Constant(m) => m.clone(),
            MatrixSeq::Geometric { base, ratio } => base * ratio.powi(n as i32),
            MatrixSeq::Explicit { values, .. } => {
                values.get(n).cloned().unwrap_or_else(|| Matrix::zeros(r, c))
            }
        }
    }

    fn values(&self) -> Box<dyn Iterator<Item = &Matrix> + '_> {
        match self {
            MatrixSeq::Zero { .. } => Box::new(std::iter::empty()),
            MatrixSeq::Constant(m) | MatrixSeq::Geometric { base: m, .. } => Box::new(std::iter::once(m)),
            MatrixSeq::Explicit { values, .. } => Box::new(values.iter()),
        }
    }

    /// True when every term is diagonal (square, zero off the diagonal).
    pub fn is_diagonal(&self) -> bool {
        let (r, c) = self.shape();
        r == c
            && self.values().all(|m| {
                (0..r).all(|i| (0..c).all(|j| i == j || m[(i, j)] == 0.0))
            })
    }

    fn validate(&self, what: &'static str) -> Result<()> {
        let (r, c) = self.shape();
        for m in self.values() {
            if m.nrows() != r || m.ncols() != c {
                return Err(Error::DimensionMismatch {
                    what,
                    expected: r * c,
                    found: m.nrows() * m.ncols(),
                });
            }
            if m.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidSystem(format!("{what} has non-finite entries")));
            }
        }
        if let MatrixSeq::Geometric { ratio, .. } = self {
            if !ratio.is_finite() {
                return Err(Error::InvalidSystem(format!("{what} ratio is not finite")));
            }
        }
        Ok(())
    }
}

/// Initial value `X(0) = ξ`.
#[derive(Debug, Clone, PartialEq)]
pub enum Initial {
    Fixed(Vector),
    /// Drawn from the given law at the start of each path's stream.
    Random(NoiseSpec),
}

/// Kernel, forcing, diffusion, noise and initial data up to horizon `N`.
/// The sequences are materialised for `n = 0..=N` at construction.
#[derive(Debug, Clone)]
pub struct DiscreteSystem {
    kernel: KernelSeq,
    noise: NoiseSpec,
    initial: Initial,
    horizon: usize,
    k: Vec<Matrix>,
    f: Vec<Vector>,
    sigma: Vec<Matrix>,
}

impl DiscreteSystem {
    /// Rejects a non-diagonal diffusion unless the noise is Gaussian with
    /// independent components.
    pub fn new(
        kernel: KernelSeq,
        forcing: MatrixSeq,
        diffusion: MatrixSeq,
        noise: NoiseSpec,
        initial: Option<Initial>,
        horizon: usize,
    ) -> Result<Self> {
        let d = kernel.dim();
        if d == 0 {
            return Err(Error::InvalidSystem("state dimension must be positive".into()));
        }
        forcing.validate("forcing")?;
        diffusion.validate("diffusion")?;
        noise.validate()?;
        if forcing.shape() != (d, 1) {
            return Err(Error::DimensionMismatch {
                what: "forcing (d x 1)",
                expected: d,
                found: forcing.shape().0 * forcing.shape().1,
            });
        }
        if diffusion.shape() != (d, noise.dim) {
            return Err(Error::DimensionMismatch {
                what: "diffusion (d x m)",
                expected: d * noise.dim,
                found: diffusion.shape().0 * diffusion.shape().1,
            });
        }
        if !noise.is_standard_gaussian() && !diffusion.is_diagonal() {
            return Err(Error::InvalidSystem(
                "a non-diagonal diffusion requires gaussian-iid noise with independent components"
                    .into(),
            ));
        }
        let initial = initial.unwrap_or_else(|| Initial::Fixed(Vector::zeros(d)));
        match &initial {
            Initial::Fixed(x) if x.len() != d => {
                return Err(Error::DimensionMismatch {
                    what: "initial value",
                    expected: d,
                    found: x.len(),
                })
            }
            Initial::Random(spec) => {
                spec.validate()?;
                if spec.dim != d {
                    return Err(Error::DimensionMismatch {
                        what: "initial law",
                        expected: d,
                        found: spec.dim,
                    });
                }
            }
            _ => {}
        }
        let n = horizon + 1;
        Ok(Self {
            k: kernel.materialize(n),
            f: (0..n).map(|i| forcing.at(i).column(0).into_owned()).collect(),
            sigma: (0..n).map(|i| diffusion.at(i)).collect(),
            kernel,
            noise,
            initial,
            horizon,
        })
    }

    pub fn dim(&self) -> usize {
        self.kernel.dim()
    }

    pub fn noise_dim(&self) -> usize {
        self.noise.dim
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn kernel(&self) -> &KernelSeq {
        &self.kernel
    }

    pub fn noise(&self) -> &NoiseSpec {
        &self.noise
    }

    pub fn initial(&self) -> &Initial {
        &self.initial
    }

    pub(crate) fn k(&self) -> &[Matrix] {
        &self.k
    }

    pub(crate) fn f(&self) -> &[Vector] {
        &self.f
    }

    pub(crate) fn sigma(&self) -> &[Matrix] {
        &self.sigma
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::NoiseFamily;

    #[test]
    fn non_gaussian_noise_requires_diagonal_diffusion() {
        let full = Matrix::from_row_slice(2, 2, &[1.0, 0.5, 0.0, 1.0]);
        let uniform = NoiseSpec::new(NoiseFamily::Uniform { low: -1.0, high: 1.0 }, true, 2).unwrap();
        let forcing = MatrixSeq::Zero { rows: 2, cols: 1 };
        let err = DiscreteSystem::new(
            KernelSeq::zero(2),
            forcing.clone(),
            MatrixSeq::Constant(full.clone()),
            uniform.clone(),
            None,
            10,
        );
        assert!(matches!(err, Err(Error::InvalidSystem(_))));
        assert!(DiscreteSystem::new(
            KernelSeq::zero(2),
            forcing.clone(),
            MatrixSeq::Constant(Matrix::identity(2, 2)),
            uniform,
            None,
            10
        )
        .is_ok());
        assert!(DiscreteSystem::new(
            KernelSeq::zero(2),
            forcing.clone(),
            MatrixSeq::Constant(full.clone()),
            NoiseSpec::gaussian(2),
            None,
            10
        )
        .is_ok());
        let dependent = NoiseSpec::new(NoiseFamily::GaussianIid, false, 2).unwrap();
        assert!(DiscreteSystem::new(
            KernelSeq::zero(2),
            forcing,
            MatrixSeq::Constant(full),
            dependent,
            None,
            10
        )
        .is_err());
    }
}
