use crate::error::{Error, Result};
use crate::func::{MatrixFn, VectorFn};
use crate::grid::GridSpec;
use crate::measure::{DiscreteKernel, SignedMeasure, Support};
use crate::rng::{standard_normal, PathRng};
use crate::Vector;

/// Per-cell forcing integrals and diffusion multipliers, shared read-only by
/// every path on the same grid.
#[derive(Debug, Clone, PartialEq)]
pub struct CellInputs {
    dim: usize,
    noise_dim: usize,
    /// `∫_{t_k}^{t_k+h} f`, row-major `n_steps x d`.
    forcing: Vec<f64>,
    /// Row-major `d x m` multiplier per cell.
    diffusion: Vec<f64>,
    forcing_zero: bool,
}

impl CellInputs {
    pub fn new(forcing: &VectorFn, diffusion: &MatrixFn, grid: &GridSpec) -> Result<Self> {
        let d = forcing.dim();
        if diffusion.rows() != d {
            return Err(Error::DimensionMismatch {
                what: "diffusion rows",
                expected: d,
                found: diffusion.rows(),
            });
        }
        let m = diffusion.cols();
        let n = grid.n_steps();
        let h = grid.step();
        let mut f = vec![0.0; n * d];
        let forcing_zero = forcing.is_zero();
        if !forcing_zero {
            for (k, chunk) in f.chunks_exact_mut(d).enumerate() {
                forcing.cell_integral(grid.time(k), h, chunk);
            }
        }
        let mut s = vec![0.0; n * d * m];
        if !diffusion.is_zero() {
            for (k, chunk) in s.chunks_exact_mut(d * m).enumerate() {
                diffusion.cell_scale(grid.time(k), h, chunk);
            }
        }
        if f.iter().chain(&s).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("forcing or diffusion on the grid"));
        }
        Ok(Self {
            dim: d,
            noise_dim: m,
            forcing: f,
            diffusion: s,
            forcing_zero,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn noise_dim(&self) -> usize {
        self.noise_dim
    }

    pub fn forcing(&self, k: usize) -> &[f64] {
        &self.forcing[k * self.dim..(k + 1) * self.dim]
    }

    pub fn diffusion(&self, k: usize) -> &[f64] {
        let w = self.dim * self.noise_dim;
        &self.diffusion[k * w..(k + 1) * w]
    }

    pub fn forcing_is_zero(&self) -> bool {
        self.forcing_zero
    }

    /// Draws `ΔB_k ~ N(0, h I_m)` and adds `S_k ΔB_k` to `out`.
    #[inline]
    pub(crate) fn add_noise(&self, k: usize, rng: &mut PathRng, sqrt_h: f64, db: &mut [f64], out: &mut [f64]) {
        for v in db.iter_mut() {
            *v = sqrt_h * standard_normal(rng);
        }
        let s = self.diffusion(k);
        for (i, o) in out.iter_mut().enumerate() {
            let mut acc = 0.0;
            for (j, b) in db.iter().enumerate() {
                acc += s[i * self.noise_dim + j] * b;
            }
            *o += acc;
        }
    }
}

/// Volterra equation with a kernel measure on the half-line.
#[derive(Debug, Clone)]
pub struct ContinuousSystem {
    kernel: SignedMeasure,
    forcing: VectorFn,
    diffusion: MatrixFn,
    initial: Vector,
    grid: GridSpec,
    weights: DiscreteKernel,
    cells: CellInputs,
}

impl ContinuousSystem {
    /// `initial` defaults to zero.
    pub fn new(
        kernel: SignedMeasure,
        forcing: VectorFn,
        diffusion: MatrixFn,
        initial: Option<Vector>,
        grid: GridSpec,
    ) -> Result<Self> {
        if kernel.support() != Support::HalfLine {
            return Err(Error::InvalidSystem("the SVE kernel must live on [0, ∞)".into()));
        }
        let d = kernel.rows();
        if kernel.cols() != d || forcing.dim() != d {
            return Err(Error::DimensionMismatch {
                what: "kernel and forcing dimension",
                expected: d,
                found: forcing.dim(),
            });
        }
        let initial = initial.unwrap_or_else(|| Vector::zeros(d));
        if initial.len() != d {
            return Err(Error::DimensionMismatch {
                what: "initial value",
                expected: d,
                found: initial.len(),
            });
        }
        let weights = kernel.discretize(&grid)?;
        let cells = CellInputs::new(&forcing, &diffusion, &grid)?;
        Ok(Self {
            kernel,
            forcing,
            diffusion,
            initial,
            grid,
            weights,
            cells,
        })
    }

    pub fn dim(&self) -> usize {
        self.kernel.rows()
    }

    pub fn kernel(&self) -> &SignedMeasure {
        &self.kernel
    }

    pub fn forcing(&self) -> &VectorFn {
        &self.forcing
    }

    pub fn diffusion(&self) -> &MatrixFn {
        &self.diffusion
    }

    pub fn initial(&self) -> &Vector {
        &self.initial
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn weights(&self) -> &DiscreteKernel {
        &self.weights
    }

    pub fn cells(&self) -> &CellInputs {
        &self.cells
    }
}
