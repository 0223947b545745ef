//! Deterministic forcing and diffusion functions of time.
//!
//! Simulators never sample a forcing pointwise: they consume its integral
//! over each grid cell. For a plain closure that integral is the
//! left-endpoint value times the step, which is exactly the Euler–Maruyama
//! drift. Families with closed forms (see [`crate::corpus`]) return the exact
//! cell integral instead, which keeps fast oscillations and narrow spikes
//! meaningful on coarse grids.

use std::fmt;
use std::sync::Arc;

use crate::Matrix;

pub trait ScalarFunction: Send + Sync + fmt::Debug {
    fn eval(&self, t: f64) -> f64;

    /// Exact `∫_a^b f`, when the family has one.
    fn integral(&self, _a: f64, _b: f64) -> Option<f64> {
        None
    }

    /// Exact `∫_a^b f²`, when the family has one.
    fn square_integral(&self, _a: f64, _b: f64) -> Option<f64> {
        None
    }

    fn cell_integral(&self, t: f64, h: f64) -> f64 {
        self.integral(t, t + h).unwrap_or_else(|| self.eval(t) * h)
    }

    fn cell_square_integral(&self, t: f64, h: f64) -> f64 {
        self.square_integral(t, t + h).unwrap_or_else(|| {
            let v = self.eval(t);
            v * v * h
        })
    }

    /// Multiplier of the Brownian increment over `[t, t+h]` when this
    /// function is a diffusion coefficient. Defaults to the left endpoint.
    fn cell_scale(&self, t: f64, _h: f64) -> f64 {
        self.eval(t)
    }

    fn is_zero(&self) -> bool {
        false
    }
}

pub type SharedFn = Arc<dyn ScalarFunction>;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Zero;

impl ScalarFunction for Zero {
    fn eval(&self, _t: f64) -> f64 {
        0.0
    }
    fn integral(&self, _a: f64, _b: f64) -> Option<f64> {
        Some(0.0)
    }
    fn square_integral(&self, _a: f64, _b: f64) -> Option<f64> {
        Some(0.0)
    }
    fn is_zero(&self) -> bool {
        true
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Constant(pub f64);

impl ScalarFunction for Constant {
    fn eval(&self, _t: f64) -> f64 {
        self.0
    }
    fn integral(&self, a: f64, b: f64) -> Option<f64> {
        Some(self.0 * (b - a))
    }
    fn square_integral(&self, a: f64, b: f64) -> Option<f64> {
        Some(self.0 * self.0 * (b - a))
    }
    fn is_zero(&self) -> bool {
        self.0 == 0.0
    }
}

/// Arbitrary closure, integrated by the left-endpoint rule.
pub struct FromFn<F> {
    name: String,
    f: F,
}

impl<F> fmt::Debug for FromFn<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FromFn({})", self.name)
    }
}

impl<F: Fn(f64) -> f64 + Send + Sync> ScalarFunction for FromFn<F> {
    fn eval(&self, t: f64) -> f64 {
        (self.f)(t)
    }
}

pub fn from_fn<F: Fn(f64) -> f64 + Send + Sync + 'static>(name: &str, f: F) -> SharedFn {
    Arc::new(FromFn {
        name: name.to_string(),
        f,
    })
}

/// `σ = √g` for a non-negative `g`. The noise increment over a cell is scaled
/// by the root-mean-square of `σ` there, so `Var(∫σ dB)` matches `∫g` cell by
/// cell.
#[derive(Debug, Clone)]
pub struct SqrtOf(pub SharedFn);

impl ScalarFunction for SqrtOf {
    fn eval(&self, t: f64) -> f64 {
        self.0.eval(t).max(0.0).sqrt()
    }
    fn square_integral(&self, a: f64, b: f64) -> Option<f64> {
        self.0.integral(a, b)
    }
    fn cell_square_integral(&self, t: f64, h: f64) -> f64 {
        self.0.cell_integral(t, h)
    }
    fn cell_scale(&self, t: f64, h: f64) -> f64 {
        (self.0.cell_integral(t, h).max(0.0) / h).sqrt()
    }
    fn is_zero(&self) -> bool {
        self.0.is_zero()
    }
}

/// `f²` viewed as a function in its own right.
#[derive(Debug, Clone)]
pub struct Squared(pub SharedFn);

impl ScalarFunction for Squared {
    fn eval(&self, t: f64) -> f64 {
        let v = self.0.eval(t);
        v * v
    }
    fn integral(&self, a: f64, b: f64) -> Option<f64> {
        self.0.square_integral(a, b)
    }
    fn cell_integral(&self, t: f64, h: f64) -> f64 {
        self.0.cell_square_integral(t, h)
    }
    fn is_zero(&self) -> bool {
        self.0.is_zero()
    }
}

/// `Σ_i f_i`, used for additivity checks.
#[derive(Debug, Clone)]
pub struct Sum(pub Vec<SharedFn>);

impl ScalarFunction for Sum {
    fn eval(&self, t: f64) -> f64 {
        self.0.iter().map(|f| f.eval(t)).sum()
    }
    fn integral(&self, a: f64, b: f64) -> Option<f64> {
        self.0.iter().map(|f| f.integral(a, b)).sum()
    }
    fn cell_integral(&self, t: f64, h: f64) -> f64 {
        self.0.iter().map(|f| f.cell_integral(t, h)).sum()
    }
}

/// `∫_a^b f`: the closed form when available, otherwise left-endpoint cells
/// of width at most `h` (the last cell may be shorter).
pub fn integrate(f: &dyn ScalarFunction, a: f64, b: f64, h: f64) -> f64 {
    if let Some(v) = f.integral(a, b) {
        return v;
    }
    let mut acc = 0.0;
    let mut t = a;
    while t < b {
        let w = h.min(b - t);
        acc += f.eval(t) * w;
        t += w;
    }
    acc
}

/// `R^d`-valued forcing built from scalar components.
#[derive(Debug, Clone)]
pub struct VectorFn {
    components: Vec<SharedFn>,
}

impl VectorFn {
    pub fn new(components: Vec<SharedFn>) -> Self {
        Self { components }
    }

    pub fn zero(dim: usize) -> Self {
        Self::new((0..dim).map(|_| Arc::new(Zero) as SharedFn).collect())
    }

    pub fn constant(values: &[f64]) -> Self {
        Self::new(
            values
                .iter()
                .map(|&v| Arc::new(Constant(v)) as SharedFn)
                .collect(),
        )
    }

    pub fn scalar(f: SharedFn) -> Self {
        Self::new(vec![f])
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn component(&self, i: usize) -> &SharedFn {
        &self.components[i]
    }

    pub fn eval(&self, t: f64, out: &mut [f64]) {
        for (o, f) in out.iter_mut().zip(&self.components) {
            *o = f.eval(t);
        }
    }

    pub fn cell_integral(&self, t: f64, h: f64, out: &mut [f64]) {
        for (o, f) in out.iter_mut().zip(&self.components) {
            *o = f.cell_integral(t, h);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.components.iter().all(|f| f.is_zero())
    }
}

/// `d x m` diffusion matrix of scalar entries (row-major); absent entries are
/// zero.
#[derive(Debug, Clone)]
pub struct MatrixFn {
    rows: usize,
    cols: usize,
    entries: Vec<Option<SharedFn>>,
}

impl MatrixFn {
    pub fn zero(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            entries: vec![None; rows * cols],
        }
    }

    pub fn diagonal(diag: Vec<SharedFn>) -> Self {
        let d = diag.len();
        let mut m = Self::zero(d, d);
        for (i, f) in diag.into_iter().enumerate() {
            m.entries[i * d + i] = Some(f);
        }
        m
    }

    pub fn scalar(f: SharedFn) -> Self {
        Self::diagonal(vec![f])
    }

    /// Constant `value * I_d`.
    pub fn constant_identity(dim: usize, value: f64) -> Self {
        Self::diagonal((0..dim).map(|_| Arc::new(Constant(value)) as SharedFn).collect())
    }

    pub fn from_entries(rows: usize, cols: usize, entries: Vec<Option<SharedFn>>) -> Self {
        assert_eq!(entries.len(), rows * cols, "entry count must be rows * cols");
        Self {
            rows,
            cols,
            entries,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn entry(&self, i: usize, j: usize) -> Option<&SharedFn> {
        self.entries[i * self.cols + j].as_ref()
    }

    pub fn is_diagonal(&self) -> bool {
        self.rows == self.cols
            && (0..self.rows).all(|i| {
                (0..self.cols).all(|j| i == j || self.entry(i, j).is_none_or(|f| f.is_zero()))
            })
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|e| e.as_ref().is_none_or(|f| f.is_zero()))
    }

    pub fn eval(&self, t: f64) -> Matrix {
        Matrix::from_fn(self.rows, self.cols, |i, j| {
            self.entry(i, j).map_or(0.0, |f| f.eval(t))
        })
    }

    /// Row-major increment multipliers for the cell `[t, t+h]`.
    pub fn cell_scale(&self, t: f64, h: f64, out: &mut [f64]) {
        for (o, e) in out.iter_mut().zip(&self.entries) {
            *o = e.as_ref().map_or(0.0, |f| f.cell_scale(t, h));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn left_endpoint_defaults() {
        let f = from_fn("t", |t| t);
        assert_eq!(f.cell_integral(2.0, 0.5), 1.0);
        assert_eq!(f.cell_square_integral(2.0, 0.5), 2.0);
        assert_eq!(integrate(f.as_ref(), 0.0, 1.0, 0.25), 0.25 * (0.0 + 0.25 + 0.5 + 0.75));
    }

    #[test]
    fn sqrt_scales_by_cell_rms() {
        let g: SharedFn = Arc::new(Constant(4.0));
        let s = SqrtOf(g);
        assert_eq!(s.cell_scale(0.0, 0.1), 2.0);
        assert!((s.cell_square_integral(0.0, 0.1) - 0.4).abs() < 1e-15);
    }

    #[test]
    fn diagonal_detection() {
        let m = MatrixFn::constant_identity(3, 1.0);
        assert!(m.is_diagonal());
        let mut entries = vec![None; 4];
        entries[1] = Some(Arc::new(Constant(1.0)) as SharedFn);
        assert!(!MatrixFn::from_entries(2, 2, entries).is_diagonal());
        entries = vec![None; 4];
        entries[1] = Some(Arc::new(Zero) as SharedFn);
        assert!(MatrixFn::from_entries(2, 2, entries).is_diagonal());
        assert!(!MatrixFn::zero(2, 3).is_diagonal());
    }
}
