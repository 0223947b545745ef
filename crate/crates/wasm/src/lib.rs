//! Browser bindings for three svlab computations. Each export takes plain
//! numbers and returns a JSON string; the `*_data` functions behind them are
//! ordinary Rust so they can be tested natively.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use svlab::conditions::s_epsilon_partial_sums;
use svlab::continuous::{
    functional_resolvent, simulate_coupled, v0_scan, ContinuousSystem, OuScheme, ScanRect,
    StabilityVerdict,
};
use svlab::corpus::Spike;
use svlab::func::ScalarFunction;
use svlab::{GridSpec, MatrixFn, SignedMeasure, VectorFn};

/// Keeps a single call well under a second in the browser.
const MAX_NODES: usize = 50_000;

#[derive(Debug, Serialize)]
pub struct SpikeData {
    /// Polyline vertices `(t, g(t))` tracing every peak.
    pub curve: Vec<(f64, f64)>,
    /// `∫_n^{n+1} g` for `n = 2..=n_max`.
    pub windows: Vec<f64>,
    /// Peak heights `n^beta`.
    pub heights: Vec<f64>,
    /// `Σ √I_n e^{-ε/I_n}` over the windows.
    pub s_epsilon: Vec<f64>,
}

pub fn spike_data(beta: f64, n_max: u32, eps: f64) -> Result<SpikeData, String> {
    let g = Spike::new(beta).map_err(|e| e.to_string())?;
    if !(2..=100_000).contains(&n_max) {
        return Err(format!("n_max must lie in [2, 100000], got {n_max}"));
    }
    if eps.is_nan() || eps <= 0.0 {
        return Err(format!("eps must be positive, got {eps}"));
    }
    let ns = 2..=u64::from(n_max);
    let mut curve = vec![(0.0, 0.0)];
    for n in ns.clone() {
        let (mid, w) = (n as f64 + 0.5, g.half_width(n));
        curve.extend([(mid - w, 0.0), (mid, g.height(n)), (mid + w, 0.0)]);
    }
    let windows: Vec<f64> = ns
        .clone()
        .map(|n| g.integral(n as f64, n as f64 + 1.0).unwrap_or(f64::NAN))
        .collect();
    Ok(SpikeData {
        curve,
        heights: ns.map(|n| g.height(n)).collect(),
        s_epsilon: s_epsilon_partial_sums(&windows, eps),
        windows,
    })
}

#[derive(Debug, Serialize)]
pub struct CoupledData {
    pub t: Vec<f64>,
    pub sve: Vec<f64>,
    pub ou: Vec<f64>,
    /// `max |X - Y|` over the path.
    pub max_gap: f64,
}

/// Scalar `dX = (-rate X + c) dt + sigma dB` against the OU path on the same
/// Brownian increments. With `rate = 1` the two coincide.
pub fn coupled_data(rate: f64, forcing: f64, sigma: f64, horizon: f64, step: f64, seed: u64) -> Result<CoupledData, String> {
    let grid = GridSpec::new(step, horizon).map_err(|e| e.to_string())?;
    if grid.n_nodes() > MAX_NODES {
        return Err(format!("at most {MAX_NODES} grid nodes, got {}", grid.n_nodes()));
    }
    let sys = ContinuousSystem::new(
        SignedMeasure::decay(1, rate),
        VectorFn::constant(&[forcing]),
        MatrixFn::constant_identity(1, sigma),
        None,
        grid,
    )
    .map_err(|e| e.to_string())?;
    let paths = simulate_coupled(&sys, seed, 0, OuScheme::EulerMaruyama).map_err(|e| e.to_string())?;
    let sve = paths.x.forward_flat().to_vec();
    let ou = paths.y.forward_flat().to_vec();
    let max_gap = paths.z.forward_flat().iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    Ok(CoupledData {
        t: (0..grid.n_nodes()).map(|k| grid.time(k)).collect(),
        sve,
        ou,
        max_gap,
    })
}

#[derive(Debug, Serialize)]
pub struct DelayData {
    pub t: Vec<f64>,
    pub resolvent: Vec<f64>,
    pub roots: Vec<(f64, f64)>,
    pub rightmost: Option<(f64, f64)>,
    pub verdict: StabilityVerdict,
}

/// Resolvent of `x'(t) = -a x(t - tau)` and the characteristic roots found
/// in `[-3, 1] x [0, 12]`.
pub fn delay_data(a: f64, tau: f64, horizon: f64, step: f64) -> Result<DelayData, String> {
    let grid = GridSpec::new(step, horizon).map_err(|e| e.to_string())?;
    if grid.n_nodes() > MAX_NODES {
        return Err(format!("at most {MAX_NODES} grid nodes, got {}", grid.n_nodes()));
    }
    let mu = SignedMeasure::delayed_feedback(a, tau).map_err(|e| e.to_string())?;
    let r = functional_resolvent(&mu, &grid).map_err(|e| e.to_string())?;
    let rect = ScanRect {
        re_min: -3.0,
        re_max: 1.0,
        im_max: 12.0,
    };
    let scan = v0_scan(&mu, rect, (61, 121)).map_err(|e| e.to_string())?;
    Ok(DelayData {
        t: (0..grid.n_nodes()).map(|k| grid.time(k)).collect(),
        resolvent: r.forward_flat().to_vec(),
        roots: scan.roots,
        rightmost: scan.rightmost,
        verdict: scan.verdict,
    })
}

fn to_js<T: Serialize>(r: Result<T, String>) -> Result<String, JsError> {
    let v = r.map_err(|e| JsError::new(&e))?;
    serde_json::to_string(&v).map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen]
pub fn spike(beta: f64, n_max: u32, eps: f64) -> Result<String, JsError> {
    to_js(spike_data(beta, n_max, eps))
}

#[wasm_bindgen]
pub fn sve_vs_ou(rate: f64, forcing: f64, sigma: f64, horizon: f64, step: f64, seed: u32) -> Result<String, JsError> {
    to_js(coupled_data(rate, forcing, sigma, horizon, step, u64::from(seed)))
}

#[wasm_bindgen]
pub fn delay(a: f64, tau: f64, horizon: f64, step: f64) -> Result<String, JsError> {
    to_js(delay_data(a, tau, horizon, step))
}
