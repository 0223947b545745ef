use serde::{Deserialize, Serialize};

use crate::continuous::system::{CellInputs, ContinuousSystem};
use crate::error::{Error, Result};
use crate::func::{MatrixFn, VectorFn};
use crate::grid::{GridPath, GridSpec};
use crate::manifest::Norm;
use crate::rng::rng_stream;

/// Euler–Maruyama for the SVE with `X_0 = ξ`.
pub fn simulate_sve(sys: &ContinuousSystem, master_seed: u64, path_index: u64) -> Result<GridPath> {
    let grid = *sys.grid();
    let d = sys.dim();
    let cells = sys.cells();
    let h = grid.step();
    let sqrt_h = h.sqrt();
    let mut rng = rng_stream(master_seed, path_index);
    let mut path = GridPath::zeros(grid, 0, d);
    path.at_mut(0).copy_from_slice(sys.initial().as_slice());
    let mut drift = vec![0.0; d];
    let mut next = vec![0.0; d];
    let mut db = vec![0.0; cells.noise_dim()];
    for k in 0..grid.n_steps() {
        drift.fill(0.0);
        sys.weights().apply(&path, k, &mut drift)?;
        let x = path.at(k);
        let f = cells.forcing(k);
        for i in 0..d {
            next[i] = x[i] + h * drift[i] + f[i];
        }
        cells.add_noise(k, &mut rng, sqrt_h, &mut db, &mut next);
        path.at_mut(k + 1).copy_from_slice(&next);
    }
    if !path.all_finite() {
        return Err(Error::NonFinite("SVE path"));
    }
    Ok(path)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OuScheme {
    /// The SVE step with `ν = -δ_0`; bit-identical to [`simulate_sve`].
    #[default]
    EulerMaruyama,
    /// `Y_{k+1} = e^{-h} Y_k + (1 - e^{-h}) F_k / h + S_k ΔB_k`.
    ExponentialIntegrator,
}

/// OU path with `Y(0) = 0` on the stream `(master_seed, path_index)`.
pub fn simulate_ou(
    forcing: &VectorFn,
    diffusion: &MatrixFn,
    grid: GridSpec,
    master_seed: u64,
    path_index: u64,
    scheme: OuScheme,
) -> Result<GridPath> {
    let cells = CellInputs::new(forcing, diffusion, &grid)?;
    simulate_ou_cells(&cells, grid, master_seed, path_index, scheme)
}

pub fn simulate_ou_cells(
    cells: &CellInputs,
    grid: GridSpec,
    master_seed: u64,
    path_index: u64,
    scheme: OuScheme,
) -> Result<GridPath> {
    let d = cells.dim();
    let h = grid.step();
    let sqrt_h = h.sqrt();
    let decay = (-h).exp();
    let gain = -(-h).exp_m1() / h;
    let mut rng = rng_stream(master_seed, path_index);
    let mut path = GridPath::zeros(grid, 0, d);
    let mut next = vec![0.0; d];
    let mut db = vec![0.0; cells.noise_dim()];
    for k in 0..grid.n_steps() {
        let y = path.at(k);
        let f = cells.forcing(k);
        match scheme {
            OuScheme::EulerMaruyama => {
                for i in 0..d {
                    next[i] = y[i] + h * -y[i] + f[i];
                }
            }
            OuScheme::ExponentialIntegrator => {
                for i in 0..d {
                    next[i] = decay * y[i] + gain * f[i];
                }
            }
        }
        cells.add_noise(k, &mut rng, sqrt_h, &mut db, &mut next);
        path.at_mut(k + 1).copy_from_slice(&next);
    }
    if !path.all_finite() {
        return Err(Error::NonFinite("OU path"));
    }
    Ok(path)
}

/// `∫_0^{T} ‖X‖^p` (left Riemann) at each `T` in `at`, which must be
/// increasing.
pub fn lp_path_integrals(path: &GridPath, p: f64, norm: Norm, at: &[f64]) -> Vec<f64> {
    let h = path.grid().step();
    let mut out = Vec::with_capacity(at.len());
    let mut acc = 0.0;
    let mut k = 0;
    for &t in at {
        let end = path.grid().index_of(t).min(path.len());
        while k < end {
            acc += norm.of(path.at(k)).powf(p) * h;
            k += 1;
        }
        out.push(acc);
    }
    out
}

/// SVE path `X`, OU path `Y` and `Z = X - Y`, all on one stream.
#[derive(Debug, Clone, PartialEq)]
pub struct CoupledPaths {
    pub x: GridPath,
    pub y: GridPath,
    pub z: GridPath,
}

pub fn simulate_coupled(
    sys: &ContinuousSystem,
    master_seed: u64,
    path_index: u64,
    scheme: OuScheme,
) -> Result<CoupledPaths> {
    let x = simulate_sve(sys, master_seed, path_index)?;
    let y = simulate_ou_cells(sys.cells(), *sys.grid(), master_seed, path_index, scheme)?;
    let z = x.sub(&y)?;
    Ok(CoupledPaths { x, y, z })
}

impl CoupledPaths {
    /// `max |X - Y - Z|`; zero by construction.
    pub fn identity_residual(&self) -> f64 {
        self.x
            .forward_flat()
            .iter()
            .zip(self.y.forward_flat())
            .zip(self.z.forward_flat())
            .map(|((x, y), z)| (x - y - z).abs())
            .fold(0.0, f64::max)
    }

    /// Max per-step residual of `Z' = ∫ν Z + g` with `g = Y + ∫ν Y`, in the
    /// discretised form `Z_{k+1} - Z_k - h (νZ_k + Y_k + νY_k)`.
    pub fn coupling_residual(&self, sys: &ContinuousSystem) -> Result<f64> {
        let d = sys.dim();
        let h = sys.grid().step();
        let mut cz = vec![0.0; d];
        let mut cy = vec![0.0; d];
        let mut worst = 0.0_f64;
        for k in 0..sys.grid().n_steps() {
            cz.fill(0.0);
            cy.fill(0.0);
            sys.weights().apply(&self.z, k, &mut cz)?;
            sys.weights().apply(&self.y, k, &mut cy)?;
            let (z0, z1, y) = (self.z.at(k), self.z.at(k + 1), self.y.at(k));
            for i in 0..d {
                let r = z1[i] - z0[i] - h * (cz[i] + y[i] + cy[i]);
                worst = worst.max(r.abs());
            }
        }
        Ok(worst)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::func::Constant;
    use crate::measure::SignedMeasure;
    use std::sync::Arc;

    fn grid() -> GridSpec {
        GridSpec::new(1e-3, 5.0).unwrap()
    }

    #[test]
    fn deterministic_decay() {
        let sys = ContinuousSystem::new(
            SignedMeasure::decay(1, 1.0),
            VectorFn::zero(1),
            MatrixFn::zero(1, 1),
            Some(crate::Vector::from_element(1, 2.0)),
            grid(),
        )
        .unwrap();
        let x = simulate_sve(&sys, 1, 0).unwrap();
        let err = (0..x.len())
            .map(|k| (x.at(k)[0] - 2.0 * (-grid().time(k)).exp()).abs())
            .fold(0.0, f64::max);
        assert!(err < 2.0 * 1e-3, "err {err}");
    }

    #[test]
    fn ou_embedding_is_exact() {
        let f = VectorFn::scalar(Arc::new(Constant(0.7)));
        let s = MatrixFn::scalar(Arc::new(Constant(0.4)));
        let sys = ContinuousSystem::new(SignedMeasure::decay(1, 1.0), f.clone(), s.clone(), None, grid())
            .unwrap();
        let c = simulate_coupled(&sys, 42, 3, OuScheme::EulerMaruyama).unwrap();
        assert_eq!(c.x, c.y);
        assert_eq!(c.identity_residual(), 0.0);
        assert!(c.coupling_residual(&sys).unwrap() < 1e-12);
    }

    #[test]
    fn ou_forced_ode() {
        let f = VectorFn::scalar(Arc::new(Constant(1.0)));
        for scheme in [OuScheme::EulerMaruyama, OuScheme::ExponentialIntegrator] {
            let y = simulate_ou(&f, &MatrixFn::zero(1, 1), grid(), 0, 0, scheme).unwrap();
            let err = (0..y.len())
                .map(|k| (y.at(k)[0] - (1.0 - (-grid().time(k)).exp())).abs())
                .fold(0.0, f64::max);
            assert!(err < 1e-3, "{scheme:?}: {err}");
        }
        let zero = simulate_ou(&VectorFn::zero(1), &MatrixFn::zero(1, 1), grid(), 0, 0, OuScheme::EulerMaruyama)
            .unwrap();
        assert!(zero.forward_flat().iter().all(|&v| v == 0.0));
    }
}
