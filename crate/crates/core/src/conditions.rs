//! Admissibility conditions on forcing and diffusion, tested on finite
//! horizons.
//!
//! Window integrals `t -> ∫_t^{t+θ} f` are built from the same cell integrals
//! the simulators consume, so a condition and a simulation of the same
//! function always see the same numbers.

use serde::Serialize;
use serde_json::json;

use crate::error::{Error, Result};
use crate::evidence::{doubling_checkpoints, doubling_indices, Checkpoint, EvidenceReport, TailThresholds, Verdict};
use crate::func::{ScalarFunction, Squared};
use crate::grid::GridSpec;

/// Window widths standing in for "all θ > 0".
pub const DEFAULT_THETAS: [f64; 4] = [0.5, 1.0, 2.0, 4.0];

/// `t_k -> ∫_{t_k}^{t_k+θ} f` on every node of `grid`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WindowProfile {
    pub theta: f64,
    pub grid: GridSpec,
    pub values: Vec<f64>,
}

fn cell_prefix(f: &dyn ScalarFunction, grid: &GridSpec, cells: usize) -> Vec<f64> {
    let h = grid.step();
    let mut cum = Vec::with_capacity(cells + 1);
    cum.push(0.0);
    let mut acc = 0.0;
    for k in 0..cells {
        acc += f.cell_integral(grid.time(k), h);
        cum.push(acc);
    }
    cum
}

pub fn window_integral(f: &dyn ScalarFunction, theta: f64, grid: &GridSpec) -> Result<WindowProfile> {
    if !(theta > 0.0) {
        return Err(Error::InvalidParameter(format!("window width must be positive, got {theta}")));
    }
    let m = grid.snap(theta)?.max(1) as usize;
    let nodes = grid.n_nodes();
    let cum = cell_prefix(f, grid, nodes - 1 + m);
    let values: Vec<f64> = (0..nodes).map(|k| cum[k + m] - cum[k]).collect();
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("window integral"));
    }
    Ok(WindowProfile {
        theta,
        grid: *grid,
        values,
    })
}

/// `∫_0^{T} |v|^p` (left Riemann) at each checkpoint `T`.
fn integral_checkpoints(values: &[f64], h: f64, p: f64, times: &[f64]) -> Vec<Checkpoint> {
    let mut out = Vec::with_capacity(times.len());
    let mut acc = 0.0;
    let mut k = 0;
    for &t in times {
        let end = ((t / h).round() as usize).min(values.len());
        while k < end {
            acc += values[k].abs().powf(p) * h;
            k += 1;
        }
        out.push(Checkpoint { at: t, value: acc });
    }
    out
}

/// Partial sums `Σ_{n<N} a_n` at the given `N`.
fn sum_checkpoints(terms: &[f64], at: &[usize]) -> Vec<Checkpoint> {
    let mut out = Vec::with_capacity(at.len());
    let mut acc = 0.0;
    let mut k = 0;
    for &n in at {
        while k < n.min(terms.len()) {
            acc += terms[k];
            k += 1;
        }
        out.push(Checkpoint { at: n as f64, value: acc });
    }
    out
}

fn check_p(p: f64, min: f64) -> Result<()> {
    if p.is_finite() && p >= min {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("exponent must be at least {min}, got {p}")))
    }
}

/// Tail rule on `∫_0^{T_k} |profile|^p` at doubling checkpoints from
/// `t_min` up to the grid horizon.
pub fn lp_integral_evidence(
    profile: &WindowProfile,
    p: f64,
    t_min: f64,
    thresholds: &TailThresholds,
) -> Result<EvidenceReport> {
    check_p(p, 1.0)?;
    Ok(window_report("lp-integral", profile, p, t_min, thresholds))
}

fn window_report(
    condition: &str,
    profile: &WindowProfile,
    p: f64,
    t_min: f64,
    thresholds: &TailThresholds,
) -> EvidenceReport {
    let times = doubling_checkpoints(t_min, profile.grid.horizon());
    let cps = integral_checkpoints(&profile.values, profile.grid.step(), p, &times);
    EvidenceReport::from_checkpoints(
        condition,
        json!({"theta": profile.theta, "p": p, "t_min": t_min, "step_h": profile.grid.step()}),
        cps,
        thresholds,
    )
}

/// Windows of `f` in `L^p` for every `θ` in `thetas`.
pub fn cond_f_evidence(
    f: &dyn ScalarFunction,
    thetas: &[f64],
    p: f64,
    grid: &GridSpec,
    t_min: f64,
    thresholds: &TailThresholds,
) -> Result<EvidenceReport> {
    check_p(p, 1.0)?;
    let parts = thetas
        .iter()
        .map(|&th| Ok(window_report("cond-f", &window_integral(f, th, grid)?, p, t_min, thresholds)))
        .collect::<Result<Vec<_>>>()?;
    Ok(EvidenceReport::aggregate(
        "cond-f",
        json!({"thetas": thetas, "p": p, "t_min": t_min, "horizon_T": grid.horizon()}),
        parts,
        thresholds,
    ))
}

/// Windows of `σ²` in `L^{p/2}` for every `θ`, `p >= 2`.
pub fn sigma_high_p_evidence(
    sigma: std::sync::Arc<dyn ScalarFunction>,
    thetas: &[f64],
    p: f64,
    grid: &GridSpec,
    t_min: f64,
    thresholds: &TailThresholds,
) -> Result<EvidenceReport> {
    check_p(p, 2.0)?;
    let sq = Squared(sigma);
    let parts = thetas
        .iter()
        .map(|&th| {
            Ok(window_report(
                "cond-sigma-high",
                &window_integral(&sq, th, grid)?,
                p / 2.0,
                t_min,
                thresholds,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EvidenceReport::aggregate(
        "cond-sigma-high",
        json!({"thetas": thetas, "p": p, "t_min": t_min, "horizon_T": grid.horizon()}),
        parts,
        thresholds,
    ))
}

/// `∫_a^b g`: the closed form if there is one, else cells of width `h`.
fn mass(g: &dyn ScalarFunction, a: f64, b: f64, h: f64) -> f64 {
    crate::func::integrate(g, a, b, h)
}

/// `∫_n^{n+1} g` for `n = 0..count`.
pub fn unit_window_masses(g: &dyn ScalarFunction, count: usize, h: f64) -> Vec<f64> {
    (0..count).map(|n| mass(g, n as f64, n as f64 + 1.0, h)).collect()
}

/// `I_n = ∫_n^{n+1} σ²` for `n = 0..count`.
pub fn unit_square_masses(sigma: &dyn ScalarFunction, count: usize, h: f64) -> Vec<f64> {
    (0..count)
        .map(|n| {
            let (a, b) = (n as f64, n as f64 + 1.0);
            sigma.square_integral(a, b).unwrap_or_else(|| {
                let cells = (1.0 / h).round() as usize;
                (0..cells).map(|j| sigma.cell_square_integral(a + j as f64 * h, h)).sum()
            })
        })
        .collect()
}

/// `Σ_{n<N} I_n^{p/2}` under the tail rule at doubling `N` from `n_min`.
pub fn sigma_low_p_evidence(
    sigma: &dyn ScalarFunction,
    p: f64,
    n: usize,
    n_min: usize,
    h: f64,
    thresholds: &TailThresholds,
) -> Result<EvidenceReport> {
    check_p(p, 1.0)?;
    let terms: Vec<f64> = unit_square_masses(sigma, n, h)
        .into_iter()
        .map(|i| i.abs().powf(p / 2.0))
        .collect();
    let cps = sum_checkpoints(&terms, &doubling_indices(n_min, n));
    Ok(EvidenceReport::from_checkpoints(
        "cond-sigma-low",
        json!({"p": p, "n": n, "n_min": n_min, "step_h": h}),
        cps,
        thresholds,
    ))
}

/// `√I exp(-ε/I)`, with `0` for `I = 0`.
pub fn s_epsilon_term(i: f64, eps: f64) -> f64 {
    if i <= 0.0 {
        0.0
    } else {
        i.sqrt() * (-eps / i).exp()
    }
}

/// `S_N(ε) = Σ_{n<=N} √I_n exp(-ε/I_n)` for every `N`, with compensated
/// (Neumaier) summation.
pub fn s_epsilon_partial_sums(windows: &[f64], eps: f64) -> Vec<f64> {
    let mut sum = 0.0_f64;
    let mut comp = 0.0_f64;
    windows
        .iter()
        .map(|&i| {
            let x = s_epsilon_term(i, eps);
            let t = sum + x;
            if sum.abs() >= x.abs() {
                comp += (sum - t) + x;
            } else {
                comp += (x - t) + sum;
            }
            sum = t;
            sum + comp
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SEpsilonReport {
    pub eps: Vec<f64>,
    pub partial_sums: Vec<Vec<f64>>,
    pub report: EvidenceReport,
}

pub fn s_epsilon_from_windows(
    windows: &[f64],
    eps: &[f64],
    n_min: usize,
    thresholds: &TailThresholds,
) -> Result<SEpsilonReport> {
    if eps.is_empty() || eps.iter().any(|e| !(*e > 0.0)) {
        return Err(Error::InvalidParameter("every ε must be positive".into()));
    }
    let at = doubling_indices(n_min, windows.len());
    let mut sums = Vec::with_capacity(eps.len());
    let mut parts = Vec::with_capacity(eps.len());
    for &e in eps {
        let terms: Vec<f64> = windows.iter().map(|&i| s_epsilon_term(i, e)).collect();
        parts.push(EvidenceReport::from_checkpoints(
            "s-epsilon",
            json!({"eps": e}),
            sum_checkpoints(&terms, &at),
            thresholds,
        ));
        sums.push(s_epsilon_partial_sums(windows, e));
    }
    Ok(SEpsilonReport {
        eps: eps.to_vec(),
        partial_sums: sums,
        report: EvidenceReport::aggregate(
            "s-epsilon",
            json!({"eps": eps, "n": windows.len(), "n_min": n_min}),
            parts,
            thresholds,
        ),
    })
}

pub fn s_epsilon_series(
    sigma: &dyn ScalarFunction,
    eps: &[f64],
    n: usize,
    n_min: usize,
    h: f64,
    thresholds: &TailThresholds,
) -> Result<SEpsilonReport> {
    s_epsilon_from_windows(&unit_square_masses(sigma, n, h), eps, n_min, thresholds)
}

/// Verdicts for `v ∈ L^p` and for unit windows of `f` in `ℓ^p`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairedReport {
    pub v: EvidenceReport,
    pub windows: EvidenceReport,
    pub agree: bool,
    /// Set when the two verdicts differ.
    pub anomaly: bool,
}

/// `v(t) = ∫_0^t e^{-β(t-s)} f(s) ds` by the exponential integrator, then
/// `∫|v|^p` against `Σ (∫_n^{n+1} f)^p` for `p ∈ (0, 1)`.
pub fn exp_integrator_equiv(
    f: &dyn ScalarFunction,
    beta: f64,
    p: f64,
    grid: &GridSpec,
    t_min: f64,
    thresholds: &TailThresholds,
) -> Result<PairedReport> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidParameter(format!("p must lie in (0, 1), got {p}")));
    }
    if !(beta > 0.0) {
        return Err(Error::InvalidParameter(format!("β must be positive, got {beta}")));
    }
    let h = grid.step();
    let n = grid.n_steps();
    let mut cells = Vec::with_capacity(n);
    for k in 0..n {
        let t = grid.time(k);
        let value = f.eval(t);
        let cell = f.cell_integral(t, h);
        if value < 0.0 || cell < 0.0 {
            return Err(Error::NegativeSample { t, value: value.min(cell) });
        }
        cells.push(cell);
    }
    let decay = (-beta * h).exp();
    let gain = -(-beta * h).exp_m1() / (beta * h);
    let mut v = Vec::with_capacity(n + 1);
    v.push(0.0);
    for (k, c) in cells.iter().enumerate() {
        v.push(decay * v[k] + gain * c);
    }
    let times = doubling_checkpoints(t_min, grid.horizon());
    let params = json!({"beta": beta, "p": p, "t_min": t_min, "step_h": h});
    let v_report = EvidenceReport::from_checkpoints(
        "lemma-p-lt-1/v",
        params.clone(),
        integral_checkpoints(&v, h, p, &times),
        thresholds,
    );
    let units = grid.horizon().floor() as usize;
    let terms: Vec<f64> = unit_window_masses(f, units, h)
        .into_iter()
        .map(|m| m.max(0.0).powf(p))
        .collect();
    let at: Vec<usize> = times.iter().map(|t| t.round() as usize).collect();
    let w_report = EvidenceReport::from_checkpoints(
        "lemma-p-lt-1/windows",
        params,
        sum_checkpoints(&terms, &at),
        thresholds,
    );
    let agree = v_report.verdict == w_report.verdict;
    Ok(PairedReport {
        v: v_report,
        windows: w_report,
        agree,
        anomaly: !agree,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IrregularSums {
    pub partial_sums: Vec<f64>,
    pub report: EvidenceReport,
}

/// `Σ_n (∫_{a_n}^{a_{n+1}} f)^p` for breakpoints with `a_0 = 0` and
/// spacings in `[min_gap, max_gap]`.
#[allow(clippy::too_many_arguments)]
pub fn irregular_window_sums(
    f: &dyn ScalarFunction,
    breakpoints: &[f64],
    min_gap: f64,
    max_gap: f64,
    p: f64,
    h: f64,
    n_min: usize,
    thresholds: &TailThresholds,
) -> Result<IrregularSums> {
    check_p(p, 1.0)?;
    if breakpoints.first() != Some(&0.0) {
        return Err(Error::InvalidParameter("breakpoints must start at a_0 = 0".into()));
    }
    for (n, w) in breakpoints.windows(2).enumerate() {
        let gap = w[1] - w[0];
        if !(gap >= min_gap && gap <= max_gap) {
            return Err(Error::SpacingViolation {
                index: n,
                spacing: gap,
                min: min_gap,
                max: max_gap,
            });
        }
    }
    let terms: Vec<f64> = breakpoints
        .windows(2)
        .map(|w| mass(f, w[0], w[1], h).abs().powf(p))
        .collect();
    let mut acc = 0.0;
    let partial_sums = terms
        .iter()
        .map(|t| {
            acc += t;
            acc
        })
        .collect();
    let cps = sum_checkpoints(&terms, &doubling_indices(n_min, terms.len()));
    Ok(IrregularSums {
        partial_sums,
        report: EvidenceReport::from_checkpoints(
            "irregular-windows",
            json!({"p": p, "windows": terms.len(), "min_gap": min_gap, "max_gap": max_gap}),
            cps,
            thresholds,
        ),
    })
}

/// Fraction of the first block supremum that still counts as "not fading".
pub const FADING_STALL_RATIO: f64 = 0.5;

/// Suprema of `|∫_t^{t+θ} f|` over `[T_k, T_{k+1})` for each `θ`; satisfied
/// once the last block is below `tol`.
pub fn fading_window_check(
    f: &dyn ScalarFunction,
    thetas: &[f64],
    block_edges: &[f64],
    step: f64,
    tol: f64,
    thresholds: &TailThresholds,
) -> Result<EvidenceReport> {
    if block_edges.len() < 2 || block_edges.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidParameter(
            "block edges must be increasing with at least two entries".into(),
        ));
    }
    let grid = GridSpec::new(step, *block_edges.last().expect("checked length"))?;
    let mut parts = Vec::with_capacity(thetas.len());
    for &th in thetas {
        let prof = window_integral(f, th, &grid)?;
        let cps = block_edges
            .windows(2)
            .map(|w| {
                let a = grid.index_of(w[0]);
                let b = grid.index_of(w[1]).min(prof.values.len());
                let sup = prof.values[a..b].iter().fold(0.0_f64, |m, v| m.max(v.abs()));
                Checkpoint { at: w[0], value: sup }
            })
            .collect();
        parts.push(EvidenceReport::fading(
            "fading",
            json!({"theta": th, "tol": tol}),
            cps,
            tol,
            FADING_STALL_RATIO,
            thresholds,
        ));
    }
    Ok(EvidenceReport::aggregate(
        "fading",
        json!({"thetas": thetas, "blocks": block_edges, "tol": tol, "step_h": step}),
        parts,
        thresholds,
    ))
}

/// Verdict for `∫_0^T |f|^p` itself, for contrast with the window condition.
pub fn direct_lp_evidence(
    f: &dyn ScalarFunction,
    p: f64,
    grid: &GridSpec,
    t_min: f64,
    thresholds: &TailThresholds,
) -> Result<EvidenceReport> {
    check_p(p, 1.0)?;
    let times = doubling_checkpoints(t_min, grid.horizon());
    let cps = if p == 2.0 && f.square_integral(0.0, 1.0).is_some() {
        times
            .iter()
            .map(|&t| Checkpoint { at: t, value: f.square_integral(0.0, t).unwrap_or(f64::NAN) })
            .collect()
    } else {
        let values: Vec<f64> = (0..grid.n_nodes()).map(|k| f.eval(grid.time(k))).collect();
        integral_checkpoints(&values, grid.step(), p, &times)
    };
    Ok(EvidenceReport::from_checkpoints(
        "direct-lp",
        json!({"p": p, "t_min": t_min}),
        cps,
        thresholds,
    ))
}

impl EvidenceReport {
    pub fn is_satisfied(&self) -> bool {
        self.verdict == Verdict::SatisfiedEvidence
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{GeometricWindow, Osc, Spike};
    use crate::func::{Constant, Zero};
    use std::sync::Arc;

    fn thr() -> TailThresholds {
        TailThresholds::default()
    }

    #[test]
    fn window_examples() {
        let g = GridSpec::new(0.01, 10.0).unwrap();
        assert!(window_integral(&Zero, 1.0, &g).unwrap().values.iter().all(|&v| v == 0.0));
        let w = window_integral(&Constant(1.0), 2.0, &g).unwrap();
        assert!(w.values.iter().all(|v| (v - 2.0).abs() < 1e-12));
        let spike = Spike::new(0.32).unwrap();
        let w = window_integral(&spike, 1.0, &GridSpec::new(1e-4, 12.0).unwrap()).unwrap();
        for n in 2..12 {
            assert!((w.values[n * 10_000] - 1.0 / n as f64).abs() < 1e-9);
        }
    }

    #[test]
    fn lp_examples() {
        let g = GridSpec::new(1.0 / 64.0, 1024.0).unwrap();
        let zero = window_integral(&Zero, 1.0, &g).unwrap();
        assert_eq!(lp_integral_evidence(&zero, 2.0, 32.0, &thr()).unwrap().verdict, Verdict::SatisfiedEvidence);
        let c = window_integral(&Constant(0.3), 1.0, &g).unwrap();
        assert_eq!(lp_integral_evidence(&c, 2.0, 32.0, &thr()).unwrap().verdict, Verdict::ViolatedEvidence);
        let osc = Osc::new(0.1, 0.5).unwrap();
        let r = cond_f_evidence(&osc, &DEFAULT_THETAS, 2.0, &g, 32.0, &thr()).unwrap();
        assert_eq!(r.verdict, Verdict::SatisfiedEvidence);
        assert_eq!(direct_lp_evidence(&osc, 2.0, &g, 32.0, &thr()).unwrap().verdict, Verdict::ViolatedEvidence);
    }

    #[test]
    fn sigma_low_examples() {
        let spike: Arc<dyn ScalarFunction> = Arc::new(crate::func::SqrtOf(Arc::new(Spike::new(0.32).unwrap())));
        assert_eq!(sigma_low_p_evidence(&Zero, 1.5, 1024, 32, 0.01, &thr()).unwrap().verdict, Verdict::SatisfiedEvidence);
        assert_eq!(sigma_low_p_evidence(spike.as_ref(), 4.0, 1024, 32, 0.01, &thr()).unwrap().verdict, Verdict::SatisfiedEvidence);
        assert_eq!(sigma_low_p_evidence(&Constant(1.0), 1.5, 1024, 32, 0.01, &thr()).unwrap().verdict, Verdict::ViolatedEvidence);
    }

    #[test]
    fn s_epsilon_examples() {
        let ones = vec![1.0; 100];
        let r = s_epsilon_from_windows(&ones, &[0.5, 1.0], 8, &thr()).unwrap();
        for (e, sums) in r.eps.iter().zip(&r.partial_sums) {
            for (n, s) in sums.iter().enumerate() {
                assert!((s - (n + 1) as f64 * (-e).exp()).abs() < 1e-12);
            }
        }
        assert_eq!(r.report.verdict, Verdict::ViolatedEvidence);
        let r = s_epsilon_series(&Zero, &[0.1, 1.0], 100, 8, 0.01, &thr()).unwrap();
        assert!(r.partial_sums.iter().flatten().all(|&v| v == 0.0));
        assert_eq!(r.report.verdict, Verdict::SatisfiedEvidence);
    }

    #[test]
    fn exp_integrator_examples() {
        let g = GridSpec::new(1.0 / 64.0, 512.0).unwrap();
        let r = exp_integrator_equiv(&Zero, 1.0, 0.5, &g, 32.0, &thr()).unwrap();
        assert!(r.agree && r.v.verdict == Verdict::SatisfiedEvidence);
        let r = exp_integrator_equiv(&Constant(1.0), 1.0, 0.5, &g, 32.0, &thr()).unwrap();
        assert!(r.agree && r.v.verdict == Verdict::ViolatedEvidence);
        let r = exp_integrator_equiv(&GeometricWindow::new(0.5).unwrap(), 1.0, 0.5, &g, 32.0, &thr()).unwrap();
        assert!(r.agree && r.v.verdict == Verdict::SatisfiedEvidence, "{r:?}");
        assert!(matches!(
            exp_integrator_equiv(&Constant(-1.0), 1.0, 0.5, &g, 32.0, &thr()),
            Err(Error::NegativeSample { .. })
        ));
    }

    #[test]
    fn irregular_examples() {
        let spike = Spike::new(0.32).unwrap();
        let unit: Vec<f64> = (0..=50).map(|n| n as f64).collect();
        let r = irregular_window_sums(&spike, &unit, 0.5, 1.5, 1.0, 0.01, 4, &thr()).unwrap();
        let direct: f64 = (2..50).map(|n| 1.0 / n as f64).sum();
        assert!((r.partial_sums.last().unwrap() - direct).abs() < 1e-12);
        let zero = irregular_window_sums(&Zero, &unit, 0.5, 1.5, 2.0, 0.01, 4, &thr()).unwrap();
        assert!(zero.partial_sums.iter().all(|&v| v == 0.0));
        let bad = [0.0, 1.0, 1.2, 2.0];
        match irregular_window_sums(&spike, &bad, 0.5, 1.5, 2.0, 0.01, 4, &thr()) {
            Err(Error::SpacingViolation { index, .. }) => assert_eq!(index, 1),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn fading_examples() {
        let edges = [4.0, 8.0, 16.0, 32.0, 64.0];
        let r = fading_window_check(&Zero, &DEFAULT_THETAS, &edges, 1.0 / 64.0, 1e-3, &thr()).unwrap();
        assert_eq!(r.verdict, Verdict::SatisfiedEvidence);
        let r = fading_window_check(&Constant(1.0), &DEFAULT_THETAS, &edges, 1.0 / 64.0, 1e-3, &thr()).unwrap();
        assert_eq!(r.verdict, Verdict::ViolatedEvidence);
        let osc = Osc::new(0.1, 0.5).unwrap();
        let r = fading_window_check(&osc, &DEFAULT_THETAS, &edges, 1.0 / 64.0, 1e-3, &thr()).unwrap();
        assert_eq!(r.verdict, Verdict::SatisfiedEvidence);
        assert_eq!(r.recomputed_verdict(), r.verdict);
    }
}
