use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::continuous::system::CellInputs;
use crate::error::{Error, Result};
use crate::func::{MatrixFn, VectorFn};
use crate::grid::{GridPath, GridSpec};
use crate::measure::{DiscreteKernel, SignedMeasure, Support};
use crate::rng::rng_stream;

/// Delay equation with kernel `μ` on `[-τ, 0]` and initial path `ψ`.
#[derive(Debug, Clone)]
pub struct DelaySystem {
    kernel: SignedMeasure,
    tau: f64,
    psi: VectorFn,
    grid: GridSpec,
    history: usize,
    weights: DiscreteKernel,
    cells: CellInputs,
}

fn delay_of(kernel: &SignedMeasure) -> Result<f64> {
    match kernel.support() {
        Support::Delay { tau } => Ok(tau),
        Support::HalfLine => Err(Error::InvalidSystem(
            "the delay kernel must be supported on [-τ, 0]".into(),
        )),
    }
}

impl DelaySystem {
    pub fn new(
        kernel: SignedMeasure,
        psi: VectorFn,
        forcing: VectorFn,
        diffusion: MatrixFn,
        grid: GridSpec,
    ) -> Result<Self> {
        let tau = delay_of(&kernel)?;
        let d = kernel.rows();
        if kernel.cols() != d || psi.dim() != d || forcing.dim() != d {
            return Err(Error::DimensionMismatch {
                what: "delay system dimension",
                expected: d,
                found: psi.dim().max(forcing.dim()),
            });
        }
        let history = grid.snap(tau)? as usize;
        let weights = kernel.discretize(&grid)?;
        let cells = CellInputs::new(&forcing, &diffusion, &grid)?;
        Ok(Self {
            kernel,
            tau,
            psi,
            grid,
            history,
            weights,
            cells,
        })
    }

    pub fn dim(&self) -> usize {
        self.kernel.rows()
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn kernel(&self) -> &SignedMeasure {
        &self.kernel
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    /// Number of stored nodes strictly before `t = 0`.
    pub fn history(&self) -> usize {
        self.history
    }
}

/// Euler–Maruyama on `[-τ, T]`; `X = ψ` on the initial segment.
pub fn simulate_sfde(sys: &DelaySystem, master_seed: u64, path_index: u64) -> Result<GridPath> {
    let d = sys.dim();
    let grid = sys.grid;
    let h = grid.step();
    let sqrt_h = h.sqrt();
    let mut path = GridPath::zeros(grid, sys.history, d);
    for j in -(sys.history as isize)..=0 {
        sys.psi.eval(grid.time_signed(j), path.at_signed_mut(j));
    }
    let mut rng = rng_stream(master_seed, path_index);
    let mut drift = vec![0.0; d];
    let mut next = vec![0.0; d];
    let mut db = vec![0.0; sys.cells.noise_dim()];
    for k in 0..grid.n_steps() {
        drift.fill(0.0);
        sys.weights.apply(&path, k, &mut drift)?;
        let x = path.at(k);
        let f = sys.cells.forcing(k);
        for i in 0..d {
            next[i] = x[i] + h * drift[i] + f[i];
        }
        sys.cells.add_noise(k, &mut rng, sqrt_h, &mut db, &mut next);
        path.at_mut(k + 1).copy_from_slice(&next);
    }
    if !path.all_finite() {
        return Err(Error::NonFinite("SFDE path"));
    }
    Ok(path)
}

/// Same scheme as [`simulate_sfde`] with zero history, `r_τ(0) = I` and no
/// forcing or noise. Nodes hold `r_τ(t_k)` row-major.
pub fn functional_resolvent(mu: &SignedMeasure, grid: &GridSpec) -> Result<GridPath> {
    let tau = delay_of(mu)?;
    let d = mu.rows();
    let history = grid.snap(tau)? as usize;
    let weights = mu.discretize(grid)?;
    let h = grid.step();
    let mut r = GridPath::zeros(*grid, history, d * d);
    for i in 0..d {
        r.at_mut(0)[i * d + i] = 1.0;
    }
    let mut acc = vec![0.0; d * d];
    for k in 0..grid.n_steps() {
        acc.fill(0.0);
        weights.apply_block(&r, k, d, &mut acc)?;
        let prev = r.at(k).to_vec();
        for (o, (p, a)) in r.at_mut(k + 1).iter_mut().zip(prev.iter().zip(&acc)) {
            *o = p + h * a;
        }
    }
    if !r.all_finite() {
        return Err(Error::NonFinite("functional resolvent"));
    }
    Ok(r)
}

/// `det Δ(λ)` with `Δ(λ) = λI - ∫μ(ds) e^{λs}`; atoms exactly, each density
/// cell integrated in closed form.
pub fn characteristic_det(mu: &SignedMeasure, lambda: Complex64) -> Complex64 {
    let d = mu.rows();
    let mut delta: DMatrix<Complex64> = DMatrix::identity(d, d) * lambda;
    for atom in mu.atoms() {
        let e = (lambda * atom.location).exp();
        for i in 0..d {
            for j in 0..d {
                delta[(i, j)] -= e * atom.weight[(i, j)];
            }
        }
    }
    if let Some(dens) = mu.density() {
        for (c, v) in dens.values.iter().enumerate() {
            let a = dens.start + c as f64 * dens.cell;
            let b = a + dens.cell;
            let mass = if lambda.norm() < 1e-12 {
                Complex64::new(b - a, 0.0)
            } else {
                ((lambda * b).exp() - (lambda * a).exp()) / lambda
            };
            for i in 0..d {
                for j in 0..d {
                    delta[(i, j)] -= mass * v[(i, j)];
                }
            }
        }
    }
    delta.determinant()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanRect {
    pub re_min: f64,
    pub re_max: f64,
    pub im_max: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StabilityVerdict {
    Stable,
    Unstable,
    NoRootInRegion,
}

/// Result of a bounded-rectangle root scan. Roots are reported in the closed
/// upper half-plane only; the verdict is advisory.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RootScan {
    pub rect: ScanRect,
    pub resolution: (usize, usize),
    pub roots: Vec<(f64, f64)>,
    pub rightmost: Option<(f64, f64)>,
    pub verdict: StabilityVerdict,
}

fn newton(mu: &SignedMeasure, mut z: Complex64) -> Option<Complex64> {
    let eps = 1e-7;
    for _ in 0..60 {
        let f = characteristic_det(mu, z);
        let df = (characteristic_det(mu, z + eps) - characteristic_det(mu, z - eps)) / (2.0 * eps);
        if df.norm() == 0.0 || !df.is_finite() {
            return None;
        }
        let step = f / df;
        z -= step;
        if step.norm() < 1e-13 * (1.0 + z.norm()) {
            break;
        }
    }
    let scale = 1.0 + z.norm().powi(mu.rows() as i32);
    (characteristic_det(mu, z).norm() < 1e-9 * scale).then_some(z)
}

/// Seeds Newton's method at the local minima of `|det Δ|` on a
/// `res_re x res_im` lattice over the rectangle and keeps the converged roots
/// that fall inside it.
pub fn v0_scan(mu: &SignedMeasure, rect: ScanRect, resolution: (usize, usize)) -> Result<RootScan> {
    let (nr, ni) = resolution;
    if nr < 2 || ni < 2 || !(rect.re_min < rect.re_max) || !(rect.im_max > 0.0) {
        return Err(Error::InvalidParameter(
            "scan needs re_min < re_max, im_max > 0 and at least 2 x 2 nodes".into(),
        ));
    }
    let dr = (rect.re_max - rect.re_min) / (nr - 1) as f64;
    let di = rect.im_max / (ni - 1) as f64;
    let at = |a: usize, b: usize| Complex64::new(rect.re_min + a as f64 * dr, b as f64 * di);
    let mag: Vec<f64> = (0..nr)
        .flat_map(|a| (0..ni).map(move |b| (a, b)))
        .map(|(a, b)| characteristic_det(mu, at(a, b)).norm())
        .collect();
    let idx = |a: usize, b: usize| a * ni + b;
    let mut roots: Vec<Complex64> = Vec::new();
    for a in 0..nr {
        for b in 0..ni {
            let v = mag[idx(a, b)];
            let mut is_min = true;
            for (da, db) in [(-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1)] {
                let (x, y) = (a as isize + da, b as isize + db);
                if x < 0 || y < 0 || x >= nr as isize || y >= ni as isize {
                    continue;
                }
                if mag[idx(x as usize, y as usize)] < v {
                    is_min = false;
                    break;
                }
            }
            if !is_min {
                continue;
            }
            let Some(mut z) = newton(mu, at(a, b)) else { continue };
            if z.im < 0.0 {
                z = z.conj();
            }
            if z.im.abs() < 1e-10 {
                z.im = 0.0;
            }
            let slack = 1e-9;
            let inside = z.re >= rect.re_min - slack
                && z.re <= rect.re_max + slack
                && z.im <= rect.im_max + slack;
            if inside && roots.iter().all(|r| (r - z).norm() > 1e-6) {
                roots.push(z);
            }
        }
    }
    roots.sort_by(|a, b| b.re.total_cmp(&a.re).then(a.im.total_cmp(&b.im)));
    let rightmost = roots.first().copied();
    let verdict = match rightmost {
        None => StabilityVerdict::NoRootInRegion,
        Some(z) if z.re < 0.0 => StabilityVerdict::Stable,
        Some(_) => StabilityVerdict::Unstable,
    };
    Ok(RootScan {
        rect,
        resolution,
        roots: roots.iter().map(|z| (z.re, z.im)).collect(),
        rightmost: rightmost.map(|z| (z.re, z.im)),
        verdict,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Matrix;

    fn feedback(a: f64) -> SignedMeasure {
        SignedMeasure::delayed_feedback(a, 1.0).unwrap()
    }

    #[test]
    fn method_of_steps() {
        let h = 1e-3;
        let g = GridSpec::new(h, 2.0).unwrap();
        let sys = DelaySystem::new(
            feedback(0.5),
            VectorFn::constant(&[1.0]),
            VectorFn::zero(1),
            MatrixFn::zero(1, 1),
            g,
        )
        .unwrap();
        let x = simulate_sfde(&sys, 0, 0).unwrap();
        assert!((x.at(g.index_of(1.0))[0] - 0.5).abs() <= 2.0 * h);
        assert!((x.at(g.index_of(0.5))[0] - 0.75).abs() <= 2.0 * h);
        let r = functional_resolvent(&feedback(0.5), &g).unwrap();
        assert!((r.at(g.index_of(0.5))[0] - 1.0).abs() <= 2.0 * h);
        assert!((r.at(g.index_of(1.5))[0] - 0.75).abs() <= 2.0 * h);
    }

    #[test]
    fn zero_history_stays_zero() {
        let g = GridSpec::new(0.01, 3.0).unwrap();
        let sys = DelaySystem::new(feedback(2.0), VectorFn::zero(1), VectorFn::zero(1), MatrixFn::zero(1, 1), g)
            .unwrap();
        assert!(simulate_sfde(&sys, 0, 0).unwrap().as_flat().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn characteristic_values() {
        let z = Complex64::new(0.0, 0.0);
        let m = SignedMeasure::point_mass(0.0, Matrix::from_element(1, 1, -1.0), Support::Delay { tau: 1.0 })
            .unwrap();
        assert!((characteristic_det(&m, z) - 1.0).norm() < 1e-15);
        assert!((characteristic_det(&feedback(0.7), z) - 0.7).norm() < 1e-15);
        let diag = SignedMeasure::point_mass(
            -1.0,
            Matrix::from_row_slice(2, 2, &[-0.5, 0.0, 0.0, -2.0]),
            Support::Delay { tau: 1.0 },
        )
        .unwrap();
        let lam = Complex64::new(0.3, 1.1);
        let expected = characteristic_det(&feedback(0.5), lam) * characteristic_det(&feedback(2.0), lam);
        assert!((characteristic_det(&diag, lam) - expected).norm() < 1e-12);
    }

    #[test]
    fn scan_verdicts() {
        let rect = ScanRect { re_min: -3.0, re_max: 3.0, im_max: 10.0 };
        let m = SignedMeasure::point_mass(0.0, Matrix::from_element(1, 1, -1.0), Support::Delay { tau: 1.0 })
            .unwrap();
        let s = v0_scan(&m, rect, (61, 101)).unwrap();
        let (re, im) = s.rightmost.unwrap();
        assert!((re + 1.0).abs() < 1e-9 && im.abs() < 1e-9);
        assert_eq!(s.verdict, StabilityVerdict::Stable);
        assert_eq!(v0_scan(&feedback(0.5), rect, (61, 101)).unwrap().verdict, StabilityVerdict::Stable);
        let s = v0_scan(&feedback(2.0), rect, (61, 101)).unwrap();
        assert_eq!(s.verdict, StabilityVerdict::Unstable);
        assert!(s.rightmost.unwrap().0 > 0.0);
    }
}
