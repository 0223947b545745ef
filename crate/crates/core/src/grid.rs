//! Uniform time grids and grid functions.

use serde::Serialize;

use crate::error::{Error, Result};

/// Uniform grid `t_k = k * step` for `k = 0..=n_steps` covering `[0, horizon]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridSpec {
    step: f64,
    horizon: f64,
    n_steps: usize,
}

impl GridSpec {
    pub fn new(step: f64, horizon: f64) -> Result<Self> {
        if !(step.is_finite() && step > 0.0) {
            return Err(Error::InvalidGrid(format!("step_h must be positive, got {step}")));
        }
        if !(horizon.is_finite() && horizon >= step) {
            return Err(Error::InvalidGrid(format!(
                "horizon_T must be at least step_h, got {horizon} < {step}"
            )));
        }
        let ratio = horizon / step;
        let nearest = ratio.round();
        // horizon/step is usually an integer up to round-off
        let n_steps = if (ratio - nearest).abs() <= 1e-9 * nearest.max(1.0) {
            nearest
        } else {
            ratio.ceil()
        } as usize;
        Ok(Self {
            step,
            horizon,
            n_steps,
        })
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    pub fn n_nodes(&self) -> usize {
        self.n_steps + 1
    }

    pub fn time(&self, k: usize) -> f64 {
        k as f64 * self.step
    }

    /// Time of a possibly negative (history) index.
    pub fn time_signed(&self, k: isize) -> f64 {
        k as f64 * self.step
    }

    /// Index of the node nearest to `t`.
    pub fn index_of(&self, t: f64) -> usize {
        (t / self.step).round().max(0.0) as usize
    }

    /// Number of whole steps nearest to the length `x`; the snapping distance
    /// must stay below half a step.
    pub fn snap(&self, x: f64) -> Result<isize> {
        let k = (x / self.step).round();
        if (x - k * self.step).abs() >= 0.5 * self.step {
            return Err(Error::SnapMisaligned {
                location: x,
                step: self.step,
            });
        }
        Ok(k as isize)
    }

    /// Same horizon with half the step.
    pub fn refined(&self) -> Self {
        Self::new(self.step / 2.0, self.horizon).expect("halving a valid grid")
    }

    /// Same step with a different horizon.
    pub fn with_horizon(&self, horizon: f64) -> Result<Self> {
        Self::new(self.step, horizon)
    }

    pub fn digest_key(&self) -> String {
        format!("step={:e};horizon={:e};n={}", self.step, self.horizon, self.n_steps)
    }
}

/// Vector-valued function sampled on a grid, optionally with history nodes
/// before `t = 0` (used by delay equations).
///
/// Node `k` (relative to time zero, possibly negative down to `-history`) is
/// stored at flat offset `(k + history) * dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridPath {
    grid: GridSpec,
    history: usize,
    dim: usize,
    data: Vec<f64>,
}

impl GridPath {
    pub fn zeros(grid: GridSpec, history: usize, dim: usize) -> Self {
        let nodes = grid.n_nodes() + history;
        Self {
            grid,
            history,
            dim,
            data: vec![0.0; nodes * dim],
        }
    }

    pub fn from_flat(grid: GridSpec, history: usize, dim: usize, data: Vec<f64>) -> Result<Self> {
        let expected = (grid.n_nodes() + history) * dim;
        if data.len() != expected {
            return Err(Error::LengthMismatch {
                what: "grid path data",
                expected,
                found: data.len(),
            });
        }
        Ok(Self {
            grid,
            history,
            dim,
            data,
        })
    }

    /// Scalar path from one value per forward node.
    pub fn from_scalar(grid: GridSpec, values: Vec<f64>) -> Result<Self> {
        Self::from_flat(grid, 0, 1, values)
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of history nodes strictly before `t = 0`.
    pub fn history(&self) -> usize {
        self.history
    }

    /// Number of forward nodes `t_0..=t_N`.
    pub fn len(&self) -> usize {
        self.grid.n_nodes()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// State at forward node `k`.
    pub fn at(&self, k: usize) -> &[f64] {
        let o = (k + self.history) * self.dim;
        &self.data[o..o + self.dim]
    }

    pub fn at_mut(&mut self, k: usize) -> &mut [f64] {
        let o = (k + self.history) * self.dim;
        &mut self.data[o..o + self.dim]
    }

    /// State at a signed node index; `None` outside the stored range.
    pub fn at_signed(&self, k: isize) -> Option<&[f64]> {
        let j = k + self.history as isize;
        if j < 0 || j as usize >= self.grid.n_nodes() + self.history {
            return None;
        }
        let o = j as usize * self.dim;
        Some(&self.data[o..o + self.dim])
    }

    pub(crate) fn at_signed_mut(&mut self, k: isize) -> &mut [f64] {
        let o = (k + self.history as isize) as usize * self.dim;
        &mut self.data[o..o + self.dim]
    }

    /// All stored values, history first.
    pub fn as_flat(&self) -> &[f64] {
        &self.data
    }

    /// Forward values only.
    pub fn forward_flat(&self) -> &[f64] {
        &self.data[self.history * self.dim..]
    }

    /// Component `i` over the forward nodes.
    pub fn component(&self, i: usize) -> Vec<f64> {
        self.forward_flat()
            .chunks_exact(self.dim)
            .map(|x| x[i])
            .collect()
    }

    /// Pointwise difference `self - other` over the forward nodes.
    pub fn sub(&self, other: &GridPath) -> Result<GridPath> {
        if self.dim != other.dim || self.len() != other.len() {
            return Err(Error::DimensionMismatch {
                what: "grid path",
                expected: self.len() * self.dim,
                found: other.len() * other.dim,
            });
        }
        let data = self
            .forward_flat()
            .iter()
            .zip(other.forward_flat())
            .map(|(a, b)| a - b)
            .collect();
        GridPath::from_flat(self.grid, 0, self.dim, data)
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn node_count_covers_horizon() {
        let g = GridSpec::new(0.1, 1.0).unwrap();
        assert_eq!(g.n_steps(), 10);
        assert!(g.n_steps() as f64 * g.step() >= g.horizon() - 1e-12);

        let g = GridSpec::new(0.3, 1.0).unwrap();
        assert_eq!(g.n_steps(), 4);
        assert!(g.n_steps() as f64 * g.step() >= g.horizon());

        let g = GridSpec::new(1e-3, 10.0).unwrap();
        assert_eq!(g.n_steps(), 10_000);
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(GridSpec::new(0.0, 1.0).is_err());
        assert!(GridSpec::new(-0.1, 1.0).is_err());
        assert!(GridSpec::new(0.5, 0.1).is_err());
        assert!(GridSpec::new(f64::NAN, 1.0).is_err());
    }

    #[test]
    fn snapping_rejects_half_step_ties() {
        let g = GridSpec::new(0.1, 1.0).unwrap();
        assert_eq!(g.snap(0.3).unwrap(), 3);
        assert_eq!(g.snap(-1.0).unwrap(), -10);
        assert_eq!(g.snap(0.34).unwrap(), 3);
        assert!(g.snap(0.25).is_err());
    }

    #[test]
    fn history_indexing() {
        let g = GridSpec::new(0.5, 1.0).unwrap();
        let mut p = GridPath::zeros(g, 2, 1);
        p.at_signed_mut(-2)[0] = 7.0;
        p.at_mut(2)[0] = 3.0;
        assert_eq!(p.at_signed(-2).unwrap()[0], 7.0);
        assert_eq!(p.at(2)[0], 3.0);
        assert!(p.at_signed(-3).is_none());
        assert!(p.at_signed(3).is_none());
        assert_eq!(p.forward_flat().len(), 3);
    }
}
