//! Finite matrix-valued signed measures represented as finitely many atoms
//! plus a piecewise-constant density, and their grid convolution.

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Error, Result};
use crate::grid::{GridPath, GridSpec};
use crate::manifest::digest_json;
use crate::{Matrix, Vector};

/// Where a measure lives. A half-line kernel acts as `∫_[0,t] ν(ds) x(t-s)`,
/// a delay kernel as `∫_[-τ,0] μ(ds) x(t+s)`; in both cases the lag of a
/// point `s` is `|s|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum Support {
    HalfLine,
    Delay { tau: f64 },
}

impl Support {
    fn contains(&self, s: f64) -> bool {
        const SLACK: f64 = 1e-12;
        match *self {
            Support::HalfLine => s >= -SLACK && s.is_finite(),
            Support::Delay { tau } => s <= SLACK && s >= -tau - SLACK * tau.max(1.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Atom {
    pub location: f64,
    pub weight: Matrix,
}

/// Piecewise-constant matrix density, `values[i]` on
/// `[start + i*cell, start + (i+1)*cell)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Density {
    pub start: f64,
    pub cell: f64,
    pub values: Vec<Matrix>,
}

impl Density {
    pub fn end(&self) -> f64 {
        self.start + self.values.len() as f64 * self.cell
    }

    /// Value at `s`, zero outside `[start, end)`.
    pub fn value_at(&self, s: f64) -> Option<&Matrix> {
        if s < self.start - 1e-12 * self.cell {
            return None;
        }
        let i = ((s - self.start) / self.cell + 1e-9).floor();
        if i < 0.0 {
            return self.values.first();
        }
        self.values.get(i as usize)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SignedMeasure {
    rows: usize,
    cols: usize,
    support: Support,
    atoms: Vec<Atom>,
    density: Option<Density>,
}

impl SignedMeasure {
    /// Validates shapes, finiteness and support, and merges atoms sharing a
    /// location so that total variation is exact.
    pub fn new(
        rows: usize,
        cols: usize,
        support: Support,
        atoms: Vec<Atom>,
        density: Option<Density>,
    ) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidMeasure("dimensions must be positive".into()));
        }
        if let Support::Delay { tau } = support {
            if !(tau.is_finite() && tau > 0.0) {
                return Err(Error::InvalidMeasure(format!("delay must be positive, got {tau}")));
            }
        }
        let mut merged: Vec<Atom> = Vec::with_capacity(atoms.len());
        for atom in atoms {
            check_shape(&atom.weight, rows, cols, "atom weight")?;
            if !support.contains(atom.location) {
                return Err(Error::InvalidMeasure(format!(
                    "atom at {} lies outside the support {:?}",
                    atom.location, support
                )));
            }
            match merged.iter_mut().find(|a| a.location == atom.location) {
                Some(existing) => existing.weight += &atom.weight,
                None => merged.push(atom),
            }
        }
        merged.sort_by(|a, b| a.location.total_cmp(&b.location));

        if let Some(d) = &density {
            if !(d.cell.is_finite() && d.cell > 0.0) {
                return Err(Error::InvalidMeasure("density cell width must be positive".into()));
            }
            for v in &d.values {
                check_shape(v, rows, cols, "density value")?;
            }
            if !support.contains(d.start) || !support.contains(d.end()) {
                return Err(Error::InvalidMeasure(format!(
                    "density on [{}, {}] lies outside the support {:?}",
                    d.start,
                    d.end(),
                    support
                )));
            }
        }
        Ok(Self {
            rows,
            cols,
            support,
            atoms: merged,
            density,
        })
    }

    pub fn zero(dim: usize, support: Support) -> Self {
        Self::new(dim, dim, support, Vec::new(), None).expect("zero measure is valid")
    }

    /// `weight * δ_location`.
    pub fn point_mass(location: f64, weight: Matrix, support: Support) -> Result<Self> {
        let (r, c) = weight.shape();
        Self::new(r, c, support, vec![Atom { location, weight }], None)
    }

    /// Scalar `w * δ_location`.
    pub fn scalar_atom(location: f64, weight: f64, support: Support) -> Result<Self> {
        Self::point_mass(location, Matrix::from_element(1, 1, weight), support)
    }

    /// `-a * δ_0 * I` on the half-line; `a = 1` embeds the Ornstein–Uhlenbeck
    /// equation in the Volterra equation.
    pub fn decay(dim: usize, rate: f64) -> Self {
        Self::point_mass(0.0, Matrix::identity(dim, dim) * -rate, Support::HalfLine)
            .expect("decay atom is valid")
    }

    /// Scalar `-a * δ_{-τ}` on `[-τ, 0]`.
    pub fn delayed_feedback(rate: f64, tau: f64) -> Result<Self> {
        Self::scalar_atom(-tau, -rate, Support::Delay { tau })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn support(&self) -> Support {
        self.support
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn density(&self) -> Option<&Density> {
        self.density.as_ref()
    }

    /// Componentwise total variation `|m_ij|(support)`.
    pub fn total_variation(&self) -> Matrix {
        let mut tv = Matrix::zeros(self.rows, self.cols);
        for atom in &self.atoms {
            tv += atom.weight.abs();
        }
        if let Some(d) = &self.density {
            for v in &d.values {
                tv += v.abs() * d.cell;
            }
        }
        tv
    }

    pub fn scaled(&self, c: f64) -> Self {
        let mut out = self.clone();
        for a in &mut out.atoms {
            a.weight *= c;
        }
        if let Some(d) = &mut out.density {
            for v in &mut d.values {
                *v *= c;
            }
        }
        out
    }

    /// Sum of two measures on the same support. Densities must share their
    /// cell layout (or one of them must be absent).
    pub fn sum(&self, other: &SignedMeasure) -> Result<Self> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch {
                what: "measure sum",
                expected: self.rows * self.cols,
                found: other.rows * other.cols,
            });
        }
        if self.support != other.support {
            return Err(Error::InvalidMeasure("cannot add measures on different supports".into()));
        }
        let mut atoms = self.atoms.clone();
        atoms.extend(other.atoms.iter().cloned());
        let density = match (&self.density, &other.density) {
            (None, None) => None,
            (Some(d), None) | (None, Some(d)) => Some(d.clone()),
            (Some(a), Some(b)) => {
                if a.start != b.start || a.cell != b.cell {
                    return Err(Error::InvalidMeasure(
                        "densities with different cell layouts cannot be added".into(),
                    ));
                }
                let n = a.values.len().max(b.values.len());
                let zero = Matrix::zeros(self.rows, self.cols);
                let values = (0..n)
                    .map(|i| a.values.get(i).unwrap_or(&zero) + b.values.get(i).unwrap_or(&zero))
                    .collect();
                Some(Density {
                    start: a.start,
                    cell: a.cell,
                    values,
                })
            }
        };
        Self::new(self.rows, self.cols, self.support, atoms, density)
    }

    /// Canonical JSON description, used for digests and cache keys.
    pub fn to_json(&self) -> serde_json::Value {
        let mat = |m: &Matrix| -> Vec<Vec<f64>> {
            (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
        };
        json!({
            "rows": self.rows,
            "cols": self.cols,
            "support": self.support,
            "atoms": self.atoms.iter().map(|a| json!({"location": a.location, "weight": mat(&a.weight)})).collect::<Vec<_>>(),
            "density": self.density.as_ref().map(|d| json!({
                "start": d.start,
                "cell": d.cell,
                "values": d.values.iter().map(mat).collect::<Vec<_>>(),
            })),
        })
    }

    pub fn digest(&self) -> String {
        digest_json(&self.to_json())
    }

    /// Quadrature weights of the measure on `grid`: atoms snapped to the
    /// nearest node, the density by a left-endpoint Riemann sum with the grid
    /// step.
    pub fn discretize(&self, grid: &GridSpec) -> Result<DiscreteKernel> {
        let h = grid.step();
        let mut terms: Vec<(usize, Matrix)> = Vec::new();
        let mut push = |lag: usize, w: Matrix| match terms.iter_mut().find(|(l, _)| *l == lag) {
            Some((_, acc)) => *acc += w,
            None => terms.push((lag, w)),
        };
        for atom in &self.atoms {
            let lag = grid.snap(atom.location.abs())?;
            push(lag as usize, atom.weight.clone());
        }
        if let Some(d) = &self.density {
            let first = grid.snap(d.start)?;
            let count = grid.snap(d.end() - d.start)?;
            for j in 0..count {
                let s = (first + j) as f64 * h;
                if let Some(v) = d.value_at(s) {
                    let lag = (first + j).unsigned_abs();
                    push(lag, v * h);
                }
            }
        }
        terms.sort_by_key(|(l, _)| *l);
        let max_lag = terms.last().map(|(l, _)| *l).unwrap_or(0);
        Ok(DiscreteKernel {
            rows: self.rows,
            cols: self.cols,
            truncate: matches!(self.support, Support::HalfLine),
            lags: terms.iter().map(|(l, _)| *l).collect(),
            weights: terms
                .iter()
                .map(|(_, w)| {
                    (0..w.nrows())
                        .flat_map(|i| w.row(i).iter().copied().collect::<Vec<_>>())
                        .collect()
                })
                .collect(),
            max_lag,
        })
    }
}

fn check_shape(m: &Matrix, rows: usize, cols: usize, what: &'static str) -> Result<()> {
    if m.nrows() != rows || m.ncols() != cols {
        return Err(Error::DimensionMismatch {
            what,
            expected: rows * cols,
            found: m.nrows() * m.ncols(),
        });
    }
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidMeasure(format!("{what} has non-finite entries")));
    }
    Ok(())
}

/// A measure reduced to grid weights: `Σ_l W_l x(t_k - l h)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteKernel {
    rows: usize,
    cols: usize,
    /// Half-line kernels integrate over `[0, t]` only; delay kernels require
    /// the full history.
    truncate: bool,
    lags: Vec<usize>,
    /// Row-major `rows x cols` weights, aligned with `lags`.
    weights: Vec<Vec<f64>>,
    max_lag: usize,
}

impl DiscreteKernel {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn max_lag(&self) -> usize {
        self.max_lag
    }

    pub fn terms(&self) -> impl Iterator<Item = (usize, &[f64])> {
        self.lags.iter().copied().zip(self.weights.iter().map(Vec::as_slice))
    }

    /// Accumulates `Σ_l W_l X(k - l)` into `out`, where each node of `path`
    /// holds a row-major `cols x width` block (`width = 1` for vectors).
    pub fn apply_block(
        &self,
        path: &GridPath,
        k: usize,
        width: usize,
        out: &mut [f64],
    ) -> Result<()> {
        debug_assert_eq!(path.dim(), self.cols * width);
        debug_assert_eq!(out.len(), self.rows * width);
        for (lag, w) in self.lags.iter().zip(&self.weights) {
            let idx = k as isize - *lag as isize;
            let x = match path.at_signed(idx) {
                Some(x) => x,
                None if self.truncate && idx < 0 => continue,
                None => {
                    return Err(Error::HistoryUnderflow {
                        lag: *lag,
                        index: k,
                        available: path.history(),
                    })
                }
            };
            for i in 0..self.rows {
                let wi = &w[i * self.cols..(i + 1) * self.cols];
                for c in 0..width {
                    let mut acc = 0.0;
                    for (j, wij) in wi.iter().enumerate() {
                        acc += wij * x[j * width + c];
                    }
                    out[i * width + c] += acc;
                }
            }
        }
        Ok(())
    }

    pub fn apply(&self, path: &GridPath, k: usize, out: &mut [f64]) -> Result<()> {
        self.apply_block(path, k, 1, out)
    }
}

/// Quadrature of `∫ m(ds) path(t_k ∓ s)` at node `t_index`.
pub fn convolve_measure(
    m: &SignedMeasure,
    path: &GridPath,
    t_index: usize,
    grid: &GridSpec,
) -> Result<Vector> {
    if path.dim() != m.cols() {
        return Err(Error::DimensionMismatch {
            what: "path dimension",
            expected: m.cols(),
            found: path.dim(),
        });
    }
    let kernel = m.discretize(grid)?;
    let mut out = vec![0.0; m.rows()];
    kernel.apply(path, t_index, &mut out)?;
    Ok(Vector::from_vec(out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn scalar(v: f64) -> Matrix {
        Matrix::from_element(1, 1, v)
    }

    #[test]
    fn total_variation_examples() {
        let zero = SignedMeasure::zero(2, Support::HalfLine);
        assert_eq!(zero.total_variation(), Matrix::zeros(2, 2));

        let m = SignedMeasure::scalar_atom(0.0, -2.0, Support::HalfLine).unwrap();
        assert_eq!(m.total_variation()[(0, 0)], 2.0);

        let m = SignedMeasure::new(
            1,
            1,
            Support::HalfLine,
            vec![
                Atom { location: 0.0, weight: scalar(-1.0) },
                Atom { location: 1.0, weight: scalar(1.0) },
            ],
            None,
        )
        .unwrap();
        assert_eq!(m.total_variation()[(0, 0)], 2.0);
    }

    #[test]
    fn coincident_atoms_merge() {
        let m = SignedMeasure::new(
            1,
            1,
            Support::HalfLine,
            vec![
                Atom { location: 1.0, weight: scalar(-1.0) },
                Atom { location: 1.0, weight: scalar(1.0) },
            ],
            None,
        )
        .unwrap();
        assert_eq!(m.atoms().len(), 1);
        assert_eq!(m.total_variation()[(0, 0)], 0.0);
    }

    #[test]
    fn density_total_variation() {
        let d = Density {
            start: 0.0,
            cell: 0.5,
            values: vec![scalar(2.0), scalar(-4.0)],
        };
        let m = SignedMeasure::new(1, 1, Support::HalfLine, vec![], Some(d)).unwrap();
        assert_relative_eq!(m.total_variation()[(0, 0)], 3.0);
    }

    #[test]
    fn support_is_enforced() {
        assert!(SignedMeasure::scalar_atom(-0.5, 1.0, Support::HalfLine).is_err());
        assert!(SignedMeasure::scalar_atom(0.5, 1.0, Support::Delay { tau: 1.0 }).is_err());
        assert!(SignedMeasure::scalar_atom(-1.5, 1.0, Support::Delay { tau: 1.0 }).is_err());
        assert!(SignedMeasure::scalar_atom(-1.0, 1.0, Support::Delay { tau: 1.0 }).is_ok());
    }

    #[test]
    fn convolution_examples() {
        let grid = GridSpec::new(1.0, 5.0).unwrap();
        // -δ0 I applied to a constant vector
        let m = SignedMeasure::decay(2, 1.0);
        let data: Vec<f64> = (0..6).flat_map(|_| [1.5, -2.0]).collect();
        let path = GridPath::from_flat(grid, 0, 2, data).unwrap();
        let v = convolve_measure(&m, &path, 3, &grid).unwrap();
        assert_eq!(v.as_slice(), &[-1.5, 2.0]);

        // shift by one on the unit grid
        let m = SignedMeasure::scalar_atom(1.0, 1.0, Support::HalfLine).unwrap();
        let path = GridPath::from_scalar(grid, (0..6).map(|k| k as f64).collect()).unwrap();
        assert_eq!(convolve_measure(&m, &path, 3, &grid).unwrap()[0], 2.0);

        // unit density on [0, 1] against a constant path
        let grid = GridSpec::new(0.1, 2.0).unwrap();
        let d = Density { start: 0.0, cell: 1.0, values: vec![scalar(1.0)] };
        let m = SignedMeasure::new(1, 1, Support::HalfLine, vec![], Some(d)).unwrap();
        let path = GridPath::from_scalar(grid, vec![1.0; grid.n_nodes()]).unwrap();
        assert_relative_eq!(convolve_measure(&m, &path, 15, &grid).unwrap()[0], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn half_line_truncates_but_delay_underflows() {
        let grid = GridSpec::new(0.5, 2.0).unwrap();
        let m = SignedMeasure::scalar_atom(1.0, 1.0, Support::HalfLine).unwrap();
        let path = GridPath::from_scalar(grid, vec![1.0; 5]).unwrap();
        assert_eq!(convolve_measure(&m, &path, 1, &grid).unwrap()[0], 0.0);

        let mu = SignedMeasure::delayed_feedback(1.0, 1.0).unwrap();
        let err = convolve_measure(&mu, &path, 1, &grid).unwrap_err();
        assert!(matches!(err, Error::HistoryUnderflow { .. }));
    }

    #[test]
    fn delay_kernel_reads_history() {
        let grid = GridSpec::new(0.5, 1.0).unwrap();
        let mu = SignedMeasure::delayed_feedback(0.5, 1.0).unwrap();
        let mut path = GridPath::zeros(grid, 2, 1);
        path.at_signed_mut(-2)[0] = 4.0;
        assert_eq!(convolve_measure(&mu, &path, 0, &grid).unwrap()[0], -2.0);
    }
}
