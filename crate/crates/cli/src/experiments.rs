//! Built-in experiment registry behind `reproduce`. Each experiment measures
//! quantities with known targets and returns a pass/fail table.

use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use serde::Serialize;

use svlab::conditions::{
    direct_lp_evidence, exp_integrator_equiv, s_epsilon_partial_sums, s_epsilon_term, window_integral,
};
use svlab::continuous::{
    differential_resolvent, functional_resolvent, lp_path_integrals, pathwise_gap, r_conv_f, simulate_coupled,
    simulate_ou, simulate_sfde, simulate_sve, v0_scan, ContinuousSystem, DelaySystem, OuScheme, ScanRect,
    StabilityVerdict, f3_transform,
};
use svlab::corpus::{parse_function, Spike};
use svlab::discrete::{
    class_d_certificate, draw_noise, find_class_d_certificate, resolvent_seq, simulate_direct_with, simulate_voc,
    ClassDFailure, DiscreteSystem, Initial, MatrixSeq,
};
use svlab::ensemble::map_paths;
use svlab::evidence::{median, tail_decision, TailVerdict};
use svlab::func::{Constant, SharedFn};
use svlab::kernel::{GeometricTail, KernelSeq};
use svlab::noise::{BorelSet, ComponentLaw, ContinuousPart, Interval, NoiseFamily, NoiseSpec};
use svlab::rng::{rng_stream, standard_normal};
use svlab::{GridSpec, Matrix, MatrixFn, Norm, SignedMeasure, TailThresholds, Vector, VectorFn};

use crate::commands::check_cmd;
use crate::config::{CheckConfig, GridConfig, SCHEMA};
use crate::error::CliError;

/// Fixed seed for every stochastic experiment.
pub const SEED: u64 = 42;

/// `det` for the standard normal with `B1 = (0, 1)`, `B2 = (-1, 0)`, from an
/// independent high-precision quadrature.
pub const NORMAL_DET_ORACLE: f64 = 0.1071628317652483;

#[derive(Debug, Clone, Serialize)]
pub struct Row {
    pub check: String,
    pub measured: String,
    pub expected: String,
    pub tolerance: String,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct Table {
    pub id: String,
    pub criterion: Option<u8>,
    pub title: String,
    pub rows: Vec<Row>,
    pub seconds: f64,
    pub pass: bool,
    pub notes: Vec<String>,
}

impl Table {
    pub fn failing(&self) -> Vec<&Row> {
        self.rows.iter().filter(|r| !r.pass).collect()
    }

    pub fn render(&self) -> String {
        let mut s = format!("{} ({:.2} s)\n", self.title, self.seconds);
        let w = self.rows.iter().map(|r| r.check.len()).max().unwrap_or(5).max(5);
        s += &format!("{:<w$}  {:>24}  {:>24}  {:>12}  result\n", "check", "measured", "expected", "tolerance");
        for r in &self.rows {
            s += &format!(
                "{:<w$}  {:>24}  {:>24}  {:>12}  {}\n",
                r.check,
                r.measured,
                r.expected,
                r.tolerance,
                if r.pass { "PASS" } else { "FAIL" }
            );
        }
        for n in &self.notes {
            s += &format!("note: {n}\n");
        }
        s
    }
}

struct Builder {
    rows: Vec<Row>,
    notes: Vec<String>,
    start: Instant,
}

impl Builder {
    fn new() -> Self {
        Self {
            rows: Vec::new(),
            notes: Vec::new(),
            start: Instant::now(),
        }
    }

    fn row(&mut self, check: impl Into<String>, measured: impl Into<String>, expected: impl Into<String>, tolerance: impl Into<String>, pass: bool) {
        self.rows.push(Row {
            check: check.into(),
            measured: measured.into(),
            expected: expected.into(),
            tolerance: tolerance.into(),
            pass,
        });
    }

    /// `|measured - expected| <= tol`.
    fn close(&mut self, check: impl Into<String>, measured: f64, expected: f64, tol: f64) {
        let pass = (measured - expected).abs() <= tol;
        self.row(check, sci(measured), sci(expected), sci(tol), pass);
    }

    /// `measured < bound`.
    fn below(&mut self, check: impl Into<String>, measured: f64, bound: f64) {
        self.row(check, sci(measured), format!("< {}", sci(bound)), "-", measured < bound);
    }

    fn runtime(&mut self, limit: f64) {
        let t = self.start.elapsed().as_secs_f64();
        self.row("runtime [s]", format!("{t:.2}"), format!("< {limit}"), "-", t < limit);
    }

    fn finish(self, id: &str, criterion: Option<u8>, title: &str) -> Table {
        let pass = self.rows.iter().all(|r| r.pass);
        Table {
            id: id.into(),
            criterion,
            title: title.into(),
            rows: self.rows,
            seconds: self.start.elapsed().as_secs_f64(),
            pass,
            notes: self.notes,
        }
    }
}

fn sci(x: f64) -> String {
    format!("{x:.6e}")
}

pub struct Entry {
    pub id: &'static str,
    pub criterion: Option<u8>,
    pub title: &'static str,
}

pub const REGISTRY: [Entry; 15] = [
    Entry { id: "solver-equivalence", criterion: Some(1), title: "direct and variation-of-constants solvers agree" },
    Entry { id: "resolvent-closed-forms", criterion: Some(2), title: "resolvents against closed forms" },
    Entry { id: "ou-embedding", criterion: Some(3), title: "OU process embedded in the SVE" },
    Entry { id: "spike-proposition", criterion: Some(4), title: "spike windows, tail and divergence" },
    Entry { id: "dichotomy", criterion: Some(5), title: "Lp dichotomy at desk scale" },
    Entry { id: "lemma-p-lt-1", criterion: Some(6), title: "exponential integrator against unit windows, p < 1" },
    Entry { id: "s-epsilon", criterion: Some(7), title: "S(eps) series" },
    Entry { id: "ou-moments", criterion: Some(8), title: "OU variance" },
    Entry { id: "sfde-steps", criterion: Some(9), title: "delay equation by the method of steps" },
    Entry { id: "pathwise-gap", criterion: Some(10), title: "pathwise gap X - r*f" },
    Entry { id: "f3-transform", criterion: Some(11), title: "double window transform" },
    Entry { id: "class-d", criterion: Some(12), title: "class-D certificates" },
    Entry { id: "spike-windows", criterion: None, title: "spike windows equal 1/n" },
    Entry { id: "resolvent-exp", criterion: None, title: "differential resolvent of -delta_0" },
    Entry { id: "ou-embedding-table", criterion: None, title: "OU embedding, one row per corpus pair" },
];

/// Looks up `id`, also accepting `criterion-N`.
pub fn lookup(id: &str) -> Option<&'static Entry> {
    if let Some(n) = id.strip_prefix("criterion-").and_then(|n| n.parse::<u8>().ok()) {
        return REGISTRY.iter().find(|e| e.criterion == Some(n));
    }
    REGISTRY.iter().find(|e| e.id == id)
}

/// Runs a registered experiment. `scratch` receives artifacts of nested
/// `check` runs.
pub fn run(id: &str, scratch: &Path) -> Result<Table, CliError> {
    let entry = lookup(id).ok_or_else(|| {
        CliError::Config(format!(
            "unknown experiment `{id}`; expected one of {} or criterion-1..criterion-12",
            REGISTRY.iter().map(|e| e.id).collect::<Vec<_>>().join(", ")
        ))
    })?;
    let b = match entry.id {
        "solver-equivalence" => solver_equivalence()?,
        "resolvent-closed-forms" => resolvent_closed_forms()?,
        "ou-embedding" => ou_embedding(false)?,
        "ou-embedding-table" => ou_embedding(true)?,
        "spike-proposition" => spike_proposition()?,
        "dichotomy" => dichotomy(scratch)?,
        "lemma-p-lt-1" => lemma_p_lt_1()?,
        "s-epsilon" => s_epsilon()?,
        "ou-moments" => ou_moments()?,
        "sfde-steps" => sfde_steps()?,
        "pathwise-gap" => pathwise_gap_exp()?,
        "f3-transform" => f3()?,
        "class-d" => class_d(),
        "spike-windows" => spike_windows()?,
        "resolvent-exp" => resolvent_exp()?,
        _ => unreachable!("registry and dispatch agree"),
    };
    Ok(b.finish(entry.id, entry.criterion, entry.title))
}

fn normal_matrix(rng: &mut svlab::rng::PathRng, rows: usize, cols: usize) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| standard_normal(rng))
}

/// Random summable kernel `k` of dimension `1 + k mod 4`, scaled so the
/// absolute row sums of `Σ_j |K(j)|` stay below 0.9.
fn random_system(k: u64, horizon: usize) -> svlab::Result<DiscreteSystem> {
    let mut rng = rng_stream(0x5eed_0001, k);
    let d = 1 + (k % 4) as usize;
    let lags = 1 + (k as usize * 7) % 12;
    let mut explicit: Vec<Matrix> = (0..lags).map(|_| normal_matrix(&mut rng, d, d)).collect();
    let tail = (k % 2 == 1).then(|| GeometricTail {
        base: normal_matrix(&mut rng, d, d),
        ratio: 0.5,
    });
    let mut mass: f64 = explicit.iter().map(|m| m.abs().row_sum().max()).sum();
    if let Some(t) = &tail {
        mass += t.base.abs().row_sum().max() * 2.0;
    }
    let scale = 0.9 / mass;
    for m in &mut explicit {
        *m *= scale;
    }
    let tail = tail.map(|t| GeometricTail {
        base: t.base * scale,
        ratio: t.ratio,
    });
    let kernel = KernelSeq::new(d, explicit, tail)?;
    let forcing = MatrixSeq::Geometric {
        base: normal_matrix(&mut rng, d, 1),
        ratio: 0.95,
    };
    let (noise, diffusion) = if k.is_multiple_of(3) {
        let fam = NoiseFamily::TwoPoint {
            outcomes: [-1.0, 2.0],
            probs: [2.0 / 3.0, 1.0 / 3.0],
        };
        let diag = Matrix::from_diagonal(&Vector::from_fn(d, |_, _| standard_normal(&mut rng)));
        (NoiseSpec::new(fam, true, d)?, MatrixSeq::Geometric { base: diag, ratio: 0.99 })
    } else {
        (NoiseSpec::gaussian(d), MatrixSeq::Constant(normal_matrix(&mut rng, d, d)))
    };
    let initial = Initial::Fixed(Vector::from_fn(d, |_, _| standard_normal(&mut rng)));
    DiscreteSystem::new(kernel, forcing, diffusion, noise, Some(initial), horizon)
}

fn solver_equivalence() -> Result<Builder, CliError> {
    let mut b = Builder::new();
    let n = 500;
    let paths = 5;
    for k in 0..20u64 {
        let sys = random_system(k, n)?;
        let r = resolvent_seq(sys.kernel(), n);
        let mut worst = 0.0_f64;
        for i in 0..paths {
            let draws = draw_noise(&sys, SEED, i);
            let direct = simulate_direct_with(&sys, &draws)?;
            let voc = simulate_voc(&r, &sys, &draws)?;
            worst = worst.max(direct.relative_gap(&voc));
        }
        b.row(
            format!("kernel {k:2} (d = {}) max relative gap", sys.dim()),
            sci(worst),
            "0",
            "1e-9",
            worst <= 1e-9,
        );
    }
    b.runtime(10.0);
    Ok(b)
}

/// Max error of the differential resolvent of `-δ_0` against `e^{-t}`.
fn exp_resolvent_error(h: f64) -> Result<f64, CliError> {
    let g = GridSpec::new(h, 10.0)?;
    let r = differential_resolvent(&SignedMeasure::decay(1, 1.0), &g)?;
    Ok((0..r.len())
        .map(|k| (r.at(k)[0] - (-g.time(k)).exp()).abs())
        .fold(0.0, f64::max))
}

fn resolvent_exp_rows(b: &mut Builder) -> Result<(), CliError> {
    let h = 1e-3;
    let e1 = exp_resolvent_error(h)?;
    let e2 = exp_resolvent_error(h / 2.0)?;
    b.row("max |r - e^-t| on [0,10], h = 1e-3", sci(e1), format!("<= {}", sci(0.6 * h)), "-", e1 <= 0.6 * h);
    b.close("error ratio h / (h/2)", e1 / e2, 2.0, 0.4);
    Ok(())
}

fn resolvent_closed_forms() -> Result<Builder, CliError> {
    let mut b = Builder::new();
    let n = 1000;
    let r = resolvent_seq(&KernelSeq::scalar_head(-0.5), n);
    let mismatches = (0..=n).filter(|&i| r[i][(0, 0)] != 0.5f64.powi(i as i32)).count();
    b.row(
        format!("R(n) == 2^-n for n = 0..={n}"),
        format!("{mismatches} mismatches"),
        "0 mismatches",
        "exact",
        mismatches == 0,
    );
    resolvent_exp_rows(&mut b)?;
    Ok(b)
}

fn resolvent_exp() -> Result<Builder, CliError> {
    let mut b = Builder::new();
    resolvent_exp_rows(&mut b)?;
    Ok(b)
}

const CORPUS_FORCING: [&str; 6] = ["zero", "const(1)", "osc(0.1,0.5)", "spike(0.32)", "geometric-window(0.5)", "exp-decay(1)"];
const CORPUS_DIFFUSION: [&str; 4] = ["zero", "const(1)", "sqrt-spike(0.32)", "exp-decay(1)"];

fn named(name: &str) -> Result<SharedFn, CliError> {
    Ok(parse_function(name)?.func)
}

fn ou_embedding(per_pair: bool) -> Result<Builder, CliError> {
    let mut b = Builder::new();
    let grid = GridSpec::new(1e-3, 20.0)?;
    let mut worst = 0.0_f64;
    let mut bit_mismatches = 0usize;
    let mut pairs = 0usize;
    for f in CORPUS_FORCING {
        for s in CORPUS_DIFFUSION {
            let sys = ContinuousSystem::new(
                SignedMeasure::decay(1, 1.0),
                VectorFn::scalar(named(f)?),
                MatrixFn::scalar(named(s)?),
                None,
                grid,
            )?;
            let mut pair_gap = 0.0_f64;
            let mut pair_bits = 0usize;
            for i in 0..3 {
                let c = simulate_coupled(&sys, SEED, i, OuScheme::EulerMaruyama)?;
                for (x, y) in c.x.forward_flat().iter().zip(c.y.forward_flat()) {
                    pair_gap = pair_gap.max((x - y).abs());
                    pair_bits += usize::from(x.to_bits() != y.to_bits());
                }
            }
            if per_pair {
                b.row(format!("f = {f}, sigma = {s}: max |X - Y|"), sci(pair_gap), "0", "exact", pair_bits == 0);
            }
            worst = worst.max(pair_gap);
            bit_mismatches += pair_bits;
            pairs += 1;
        }
    }
    if !per_pair {
        b.row(format!("max |X - Y| over {pairs} corpus pairs"), sci(worst), "0", "exact", worst == 0.0);
        b.row("nodes differing bitwise", bit_mismatches.to_string(), "0", "exact", bit_mismatches == 0);
    }
    Ok(b)
}

fn spike_window_values(h: f64, last: usize) -> Result<Vec<f64>, CliError> {
    let g = Spike::new(0.32)?;
    let grid = GridSpec::new(h, last as f64 + 1.0)?;
    let w = window_integral(&g, 1.0, &grid)?;
    Ok((0..=last).map(|n| w.values[grid.index_of(n as f64)]).collect())
}

fn spike_windows() -> Result<Builder, CliError> {
    let mut b = Builder::new();
    let w = spike_window_values(1e-4, 100)?;
    for (n, &wn) in w.iter().enumerate().skip(2) {
        b.close(format!("n = {n:3}: quadrature vs 1/n"), wn, 1.0 / n as f64, 1e-6);
    }
    Ok(b)
}

fn spike_proposition() -> Result<Builder, CliError> {
    let mut b = Builder::new();
    let w = spike_window_values(1e-4, 1000)?;
    let worst = (2..=100).map(|n| (w[n] - 1.0 / n as f64).abs()).fold(0.0, f64::max);
    b.row("max_{n=2..100} |window(n) - 1/n|, h = 1e-4", sci(worst), "0", "1e-6", worst <= 1e-6);
    let tail: f64 = (501..=1000).map(|n| w[n] * w[n]).sum();
    b.below("sum_{n=501..1000} window(n)^2", tail, 2e-3);
    let g = Spike::new(0.32)?;
    let grid = GridSpec::new(1.0 / 64.0, 1024.0)?;
    let report = direct_lp_evidence(&g, 2.0, &grid, 32.0, &TailThresholds::default())?;
    for (cp, ratio) in report.checkpoints.iter().skip(1).zip(&report.diagnostics.checkpoint_ratios) {
        b.row(
            format!("int_0^T g^2 ratio at T = {}", cp.at),
            sci(*ratio),
            "> 1.1",
            "-",
            *ratio > 1.1,
        );
    }
    b.runtime(60.0);
    Ok(b)
}

fn check_config(function: Option<&str>, sigma: Option<&str>, p: f64) -> CheckConfig {
    let mut cfg: CheckConfig =
        crate::config::parse(&format!(r#"{{"schema":"{SCHEMA}"}}"#)).expect("minimal check config parses");
    cfg.seed = SEED;
    cfg.function = function.map(String::from);
    cfg.sigma = sigma.map(String::from);
    cfg.p = Some(p);
    cfg.grid = Some(GridConfig {
        step_h: 1.0 / 64.0,
        horizon: 1024.0,
    });
    cfg
}

fn ensemble_tail(sigma: SharedFn, paths: usize) -> Result<svlab::evidence::TailReport, CliError> {
    let grid = GridSpec::new(0.01, 1024.0)?;
    let sys = ContinuousSystem::new(
        SignedMeasure::decay(1, 1.0),
        VectorFn::scalar(named("osc(0.1,0.5)")?),
        MatrixFn::scalar(sigma),
        None,
        grid,
    )?;
    let at: Vec<f64> = (0..=1024).map(|t| t as f64).collect();
    let sums = map_paths(paths, |i| {
        simulate_sve(&sys, SEED, i).map(|x| lp_path_integrals(&x, 4.0, Norm::Max, &at))
    })
    .into_iter()
    .collect::<svlab::Result<Vec<_>>>()?;
    Ok(tail_decision(&sums, &TailThresholds::default())?)
}

fn dichotomy(scratch: &Path) -> Result<Builder, CliError> {
    let mut b = Builder::new();
    let cond_f = check_cmd("cond-f", check_config(Some("osc(0.1,0.5)"), None, 4.0), None, &scratch.join("cond-f"))?;
    let v = cond_f["verdict"].as_str().unwrap_or("").to_string();
    b.row("check cond-f, f = osc(0.1,0.5), p = 4", v.clone(), "satisfied-evidence", "-", v == "satisfied-evidence");
    let cond_s = check_cmd(
        "cond-sigma-high",
        check_config(None, Some("sqrt-spike(0.32)"), 4.0),
        None,
        &scratch.join("cond-sigma-high"),
    )?;
    let v = cond_s["verdict"].as_str().unwrap_or("").to_string();
    b.row("check cond-sigma-high, sigma^2 = spike(0.32), p = 4", v.clone(), "satisfied-evidence", "-", v == "satisfied-evidence");
    let spike = ensemble_tail(named("sqrt-spike(0.32)")?, 200)?;
    b.row(
        "M = 200 ensemble, int |X|^4, sigma^2 = spike",
        format!("{:?} (ratio {:.4})", spike.verdict, spike.diagnostics.median_ratio),
        "SummableEvidence",
        "-",
        spike.verdict == TailVerdict::SummableEvidence,
    );
    let one = ensemble_tail(Arc::new(Constant(1.0)), 200)?;
    b.row(
        "M = 200 ensemble, int |X|^4, sigma = 1",
        format!("{:?} (ratio {:.4})", one.verdict, one.diagnostics.median_ratio),
        "DivergentEvidence",
        "-",
        one.verdict == TailVerdict::DivergentEvidence,
    );
    b.runtime(300.0);
    Ok(b)
}

fn lemma_p_lt_1() -> Result<Builder, CliError> {
    let mut b = Builder::new();
    let grid = GridSpec::new(1.0 / 64.0, 1024.0)?;
    let thr = TailThresholds::default();
    for f in ["zero", "const(1)", "geometric-window(0.5)", "spike(0.32)"] {
        let func = named(f)?;
        for p in [0.4, 0.8] {
            let r = exp_integrator_equiv(func.as_ref(), 1.0, p, &grid, 32.0, &thr)?;
            b.row(
                format!("f = {f}, p = {p}: v vs windows"),
                format!("{} / {}", r.v.verdict, r.windows.verdict),
                "equal verdicts",
                "-",
                r.agree,
            );
        }
    }
    Ok(b)
}

/// `Σ_{n > from} √(1/n) e^{-ε n}`, summed from the far end.
fn harmonic_tail(eps: f64, from: usize) -> f64 {
    let mut last = from + 1;
    while s_epsilon_term(1.0 / last as f64, eps) > 1e-300 && last < 10_000_000 {
        last *= 2;
    }
    (from + 1..=last).rev().map(|n| s_epsilon_term(1.0 / n as f64, eps)).sum()
}

fn s_epsilon() -> Result<Builder, CliError> {
    let mut b = Builder::new();
    let n = 1000;
    let ones = vec![1.0; n];
    for eps in [0.1, 1.0] {
        let sums = s_epsilon_partial_sums(&ones, eps);
        let err = sums
            .iter()
            .enumerate()
            .map(|(k, s)| (s - (k + 1) as f64 * (-eps).exp()).abs())
            .fold(0.0, f64::max);
        b.row(format!("I = 1, eps = {eps}: max_N |S_N - N e^-eps|"), sci(err), "0", "1e-12", err <= 1e-12);
    }
    for eps in [0.1, 1.0] {
        let tail = harmonic_tail(eps, 30);
        b.below(format!("I_n = 1/n, eps = {eps}: tail beyond n = 30"), tail, 1e-6);
        if tail >= 1e-6 {
            let mut m = 30;
            while harmonic_tail(eps, m) >= 1e-6 {
                m += 1;
            }
            b.notes.push(format!(
                "eps = {eps}: the tail beyond 30 is {tail:.4e}; it first drops below 1e-6 beyond n = {m}"
            ));
        }
    }
    Ok(b)
}

fn ou_moments() -> Result<Builder, CliError> {
    let mut b = Builder::new();
    let grid = GridSpec::new(1e-3, 2.0)?;
    let times = [0.5, 1.0, 2.0];
    let paths = 10_000;
    let samples = map_paths(paths, |i| {
        simulate_ou(&VectorFn::zero(1), &MatrixFn::constant_identity(1, 1.0), grid, SEED, i, OuScheme::EulerMaruyama)
            .map(|y| times.map(|t| y.at(grid.index_of(t))[0]))
    })
    .into_iter()
    .collect::<svlab::Result<Vec<_>>>()?;
    for (j, t) in times.iter().enumerate() {
        let xs: Vec<f64> = samples.iter().map(|s| s[j]).collect();
        let m = paths as f64;
        let mean = xs.iter().sum::<f64>() / m;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (m - 1.0);
        let m4 = xs.iter().map(|x| (x - mean).powi(4)).sum::<f64>() / m;
        let se = ((m4 - var * var).max(0.0) / m).sqrt();
        let exact = (1.0 - (-2.0 * t).exp()) / 2.0;
        b.close(format!("Var Y({t}) (3 standard errors)"), var, exact, 3.0 * se);
    }
    b.runtime(120.0);
    Ok(b)
}

fn sfde_steps() -> Result<Builder, CliError> {
    let mut b = Builder::new();
    let h = 1e-3;
    let grid = GridSpec::new(h, 2.0)?;
    let mu = SignedMeasure::delayed_feedback(0.5, 1.0)?;
    let sys = DelaySystem::new(mu.clone(), VectorFn::constant(&[1.0]), VectorFn::zero(1), MatrixFn::zero(1, 1), grid)?;
    let x = simulate_sfde(&sys, SEED, 0)?;
    b.close("X(1)", x.at(grid.index_of(1.0))[0], 0.5, 2.0 * h);
    let r = functional_resolvent(&mu, &grid)?;
    b.close("r(1.5)", r.at(grid.index_of(1.5))[0], 0.75, 2.0 * h);
    let rect = ScanRect {
        re_min: -3.0,
        re_max: 3.0,
        im_max: 10.0,
    };
    for (a, want) in [(0.5, StabilityVerdict::Stable), (2.0, StabilityVerdict::Unstable)] {
        let scan = v0_scan(&SignedMeasure::delayed_feedback(a, 1.0)?, rect, (61, 101))?;
        let got = format!("{:?}", scan.verdict);
        let rightmost = scan.rightmost.map_or(String::new(), |(re, im)| format!(" at {re:.4}+{im:.4}i"));
        b.row(format!("v0_scan, a = {a}"), format!("{got}{rightmost}"), format!("{want:?}"), "-", scan.verdict == want);
    }
    Ok(b)
}

fn pathwise_gap_exp() -> Result<Builder, CliError> {
    let mut b = Builder::new();
    let grid = GridSpec::new(1e-3, 41.0)?;
    let f = VectorFn::constant(&[1.0]);
    let nu = SignedMeasure::decay(1, 1.0);
    let sys = ContinuousSystem::new(nu.clone(), f.clone(), MatrixFn::scalar(named("exp-decay(1)")?), None, grid)?;
    let r = differential_resolvent(&nu, &grid)?;
    let rf = r_conv_f(&r, &f, &grid)?;
    let sups = map_paths(100, |i| {
        let x = simulate_sve(&sys, SEED, i)?;
        let g = pathwise_gap(&x, &rf, Norm::Max, &[4.0, 40.0], 1.0)?;
        Ok::<_, svlab::Error>((g.blocks[0].sup, g.blocks[1].sup))
    })
    .into_iter()
    .collect::<svlab::Result<Vec<_>>>()?;
    let mut early: Vec<f64> = sups.iter().map(|s| s.0).collect();
    let mut late: Vec<f64> = sups.iter().map(|s| s.1).collect();
    let (e, l) = (median(&mut early), median(&mut late));
    b.row("median block sup over [4, 5]", sci(e), "-", "-", true);
    b.row("median block sup over [40, 41]", sci(l), format!("< {}", sci(0.2 * e)), "-", l < 0.2 * e);
    b.runtime(120.0);
    Ok(b)
}

fn f3() -> Result<Builder, CliError> {
    let mut b = Builder::new();
    let h = 1e-3;
    let grid = GridSpec::new(h, 20.0)?;
    let c = 3.0;
    let fc = f3_transform(&VectorFn::constant(&[c]), &grid)?;
    let ft = f3_transform(&VectorFn::scalar(svlab::func::from_fn("t", |t| t)), &grid)?;
    let from = grid.index_of(1.0);
    let ec = (from..grid.n_nodes()).map(|k| (fc.at(k)[0] - c / 2.0).abs()).fold(0.0, f64::max);
    let et = (from..grid.n_nodes())
        .map(|k| (ft.at(k)[0] - (grid.time(k) / 2.0 - 1.0 / 6.0)).abs())
        .fold(0.0, f64::max);
    b.row(format!("f = {c}: max |F3 - c/2| on [1, 20]"), sci(ec), format!("<= {}", sci(2.0 * h)), "2h", ec <= 2.0 * h);
    b.row("f = t: max |F3 - (t/2 - 1/6)| on [1, 20]", sci(et), format!("<= {}", sci(2.0 * h)), "2h", et <= 2.0 * h);
    Ok(b)
}

fn class_d() -> Builder {
    let mut b = Builder::new();
    let normal = ComponentLaw::continuous(ContinuousPart::Normal { mean: 0.0, sd: 1.0 });
    let b1 = BorelSet::interval(Interval::open(0.0, 1.0));
    let b2 = BorelSet::interval(Interval::open(-1.0, 0.0));
    match class_d_certificate(&normal, &b1, &b2) {
        Ok(c) => b.close("normal, B1 = (0,1), B2 = (-1,0): det", c.det, NORMAL_DET_ORACLE, 1e-6),
        Err(e) => b.row("normal, B1 = (0,1), B2 = (-1,0): det", e.to_string(), sci(NORMAL_DET_ORACLE), "1e-6", false),
    }
    let two = ComponentLaw::discrete(vec![(1.0, 0.5), (2.0, 0.5)]);
    match class_d_certificate(&two, &BorelSet::interval(Interval::point(1.0)), &BorelSet::interval(Interval::point(2.0))) {
        Ok(c) => b.row("two-point {1, 2}: det", format!("{}", c.det), "-0.25", "exact", c.det == -0.25),
        Err(e) => b.row("two-point {1, 2}: det", e.to_string(), "-0.25", "exact", false),
    }
    match find_class_d_certificate(&ComponentLaw::constant(1.0)) {
        Ok(c) => b.row("constant law", format!("certificate det = {}", c.det), "failure", "-", false),
        Err(e) => {
            let ok = e == ClassDFailure::NoTwoPositiveProbabilitySets;
            b.row("constant law: failing clause", e.to_string(), "no two disjoint positive-probability sets exist", "-", ok)
        }
    }
    b
}
