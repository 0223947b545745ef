//! Subcommand implementations. Each writes its artifacts plus exactly one
//! `manifest.json` into the output directory.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;
use serde_json::{json, Value};

use svlab::cache::ResolventCache;
use svlab::conditions;
use svlab::continuous::{
    differential_resolvent, lp_path_integrals, pathwise_gap, r_conv_f, simulate_coupled, simulate_sfde,
    simulate_sve, v0_scan,
};
use svlab::discrete::{lp_partial_sums, resolvent_seq, simulate_ensemble};
use svlab::ensemble::try_map_paths;
use svlab::evidence::{median, tail_decision};
use svlab::export;
use svlab::{GridPath, Norm, RunManifest};

use crate::config::{self, *};
use crate::error::CliError;

pub const CHECK_IDS: [&str; 7] = [
    "cond-f",
    "cond-sigma-high",
    "cond-sigma-low",
    "s-epsilon",
    "fading",
    "lemma-p-lt-1",
    "irregular-windows",
];

fn create(out: &Path, name: &str) -> Result<BufWriter<File>, CliError> {
    fs::create_dir_all(out)?;
    Ok(BufWriter::new(File::create(out.join(name))?))
}

pub fn write_json<T: Serialize>(out: &Path, name: &str, value: &T) -> Result<(), CliError> {
    let mut w = create(out, name)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

fn write_manifest(out: &Path, seed: u64, canonical: &Value, norm: Norm) -> Result<RunManifest, CliError> {
    let m = RunManifest::new(seed, canonical, norm);
    write_json(out, "manifest.json", &m)?;
    Ok(m)
}

/// Tail rule on an ensemble of partial-sum sequences, or a note explaining
/// why it was skipped.
fn tail_summary(sums: &[Vec<f64>], cfg_thresholds: &svlab::TailThresholds) -> Value {
    let thr = cfg_thresholds;
    let len = sums.first().map_or(0, Vec::len);
    if sums.len() < thr.min_paths || len < 4 * thr.window {
        return json!({
            "verdict": null,
            "note": format!(
                "tail rule needs at least {} paths and {} checkpoints; got {} and {}",
                thr.min_paths, 4 * thr.window, sums.len(), len
            ),
        });
    }
    match tail_decision(sums, thr) {
        Ok(r) => serde_json::to_value(r).expect("reports serialise"),
        Err(e) => json!({"verdict": null, "note": e.to_string()}),
    }
}

fn integer_times(horizon: f64) -> Vec<f64> {
    (0..=horizon.floor() as usize).map(|t| t as f64).collect()
}

pub fn simulate_discrete(mut cfg: DiscreteConfig, seed: Option<u64>, out: &Path) -> Result<Value, CliError> {
    check_schema(&cfg.schema)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    let sys = cfg.system()?;
    let paths = simulate_ensemble(&sys, cfg.seed, cfg.paths)?;
    let sums = paths
        .iter()
        .map(|p| lp_partial_sums(p, cfg.p, cfg.norm))
        .collect::<svlab::Result<Vec<_>>>()?;
    export::write_seq_paths(create(out, "paths.csv")?, &paths)?;
    export::write_partial_sums(create(out, "partial_sums.csv")?, &sums)?;
    let report = json!({
        "command": "simulate-discrete",
        "paths": cfg.paths,
        "p": cfg.p,
        "tail": tail_summary(&sums, &cfg.thresholds),
    });
    write_json(out, "report.json", &report)?;
    write_manifest(out, cfg.seed, &canonical(&cfg), cfg.norm)?;
    Ok(report)
}

fn max_abs_diff(a: &GridPath, b: &GridPath) -> f64 {
    a.forward_flat()
        .iter()
        .zip(b.forward_flat())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

pub fn simulate_sve_cmd(mut cfg: SveConfig, seed: Option<u64>, out: &Path) -> Result<Value, CliError> {
    check_schema(&cfg.schema)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    let sys = cfg.system()?;
    let grid = *sys.grid();
    let at = integer_times(grid.horizon());
    let mut report = json!({"command": "simulate-sve", "paths": cfg.paths, "p": cfg.p});
    let paths: Vec<GridPath> = match cfg.ou {
        Some(scheme) => {
            let coupled = try_map_paths(cfg.paths, |i| simulate_coupled(&sys, cfg.seed, i, scheme))?;
            let mut identity = 0.0_f64;
            let mut coupling = 0.0_f64;
            let mut gap = 0.0_f64;
            for c in &coupled {
                identity = identity.max(c.identity_residual());
                coupling = coupling.max(c.coupling_residual(&sys)?);
                gap = gap.max(max_abs_diff(&c.x, &c.y));
            }
            let ou: Vec<GridPath> = coupled.iter().map(|c| c.y.clone()).collect();
            export::write_grid_paths(create(out, "ou_paths.csv")?, &ou, false, cfg.stride)?;
            report["ou"] = json!({
                "scheme": scheme,
                "max_abs_x_minus_y": gap,
                "identity_residual": identity,
                "coupling_residual": coupling,
            });
            coupled.into_iter().map(|c| c.x).collect()
        }
        None => try_map_paths(cfg.paths, |i| simulate_sve(&sys, cfg.seed, i))?,
    };
    let sums: Vec<Vec<f64>> = paths.iter().map(|p| lp_path_integrals(p, cfg.p, cfg.norm, &at)).collect();
    export::write_grid_paths(create(out, "paths.csv")?, &paths, false, cfg.stride)?;
    export::write_partial_sums(create(out, "partial_sums.csv")?, &sums)?;
    report["tail"] = tail_summary(&sums, &cfg.thresholds);
    if !cfg.gap_blocks.is_empty() {
        let r = differential_resolvent(sys.kernel(), &grid)?;
        let rf = r_conv_f(&r, sys.forcing(), &grid)?;
        let profiles = paths
            .iter()
            .map(|x| pathwise_gap(x, &rf, cfg.norm, &cfg.gap_blocks, cfg.gap_width))
            .collect::<svlab::Result<Vec<_>>>()?;
        let stride = cfg.stride.max(1);
        let times: Vec<f64> = (0..grid.n_nodes()).step_by(stride).map(|k| grid.time(k)).collect();
        let gaps: Vec<Vec<f64>> = profiles
            .iter()
            .map(|g| g.values.iter().step_by(stride).copied().collect())
            .collect();
        export::write_gaps(create(out, "gaps.csv")?, &times, &gaps)?;
        let medians: Vec<Value> = cfg
            .gap_blocks
            .iter()
            .enumerate()
            .map(|(b, start)| {
                let mut sups: Vec<f64> = profiles.iter().map(|g| g.blocks[b].sup).collect();
                json!({"start": start, "end": start + cfg.gap_width, "median_sup": median(&mut sups)})
            })
            .collect();
        report["gap_blocks"] = Value::Array(medians);
    }
    write_json(out, "report.json", &report)?;
    write_manifest(out, cfg.seed, &canonical(&cfg), cfg.norm)?;
    Ok(report)
}

pub fn simulate_sfde_cmd(mut cfg: SfdeConfig, seed: Option<u64>, out: &Path) -> Result<Value, CliError> {
    check_schema(&cfg.schema)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    let sys = cfg.system()?;
    let at = integer_times(sys.grid().horizon());
    let paths = try_map_paths(cfg.paths, |i| simulate_sfde(&sys, cfg.seed, i))?;
    let sums: Vec<Vec<f64>> = paths.iter().map(|p| lp_path_integrals(p, cfg.p, cfg.norm, &at)).collect();
    export::write_grid_paths(create(out, "paths.csv")?, &paths, true, cfg.stride)?;
    export::write_partial_sums(create(out, "partial_sums.csv")?, &sums)?;
    let report = json!({
        "command": "simulate-sfde",
        "paths": cfg.paths,
        "tau": sys.tau(),
        "history_nodes": sys.history(),
        "tail": tail_summary(&sums, &cfg.thresholds),
    });
    write_json(out, "report.json", &report)?;
    write_manifest(out, cfg.seed, &canonical(&cfg), cfg.norm)?;
    Ok(report)
}

pub fn resolvent_cmd(mut cfg: ResolventConfig, seed: Option<u64>, out: &Path) -> Result<Value, CliError> {
    check_schema(&cfg.schema)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    let d = cfg.dim;
    let mut report = json!({"command": "resolvent"});
    match (&cfg.kernel, &cfg.discrete_kernel) {
        (Some(k), None) => {
            let grid = config::required(&cfg.grid, "grid", "a measure resolvent")?.build()?;
            let mu = k.build(d)?;
            let cache = ResolventCache::new(
                cfg.cache_dir.clone().map_or_else(|| out.join("cache"), Into::into),
            );
            let (r, hit) = cache.resolvent(&mu, &grid)?;
            export::write_resolvent(create(out, "resolvent.csv")?, &r)?;
            report["kind"] = json!(if mu.support() == svlab::Support::HalfLine { "differential" } else { "functional" });
            report["cache_hit"] = json!(hit);
            report["measure_digest"] = json!(mu.digest());
            if let Some(scan) = &cfg.scan {
                let res = (scan.resolution[0], scan.resolution[1]);
                report["scan"] = serde_json::to_value(v0_scan(&mu, scan.rect(), res)?)?;
            }
        }
        (None, Some(k)) => {
            let n = *config::required(&cfg.horizon, "horizon_N", "a kernel-sequence resolvent")?;
            let r = resolvent_seq(&k.build(d)?, n);
            let mut names = vec!["n".to_string()];
            for a in 1..=d {
                for b in 1..=d {
                    names.push(format!("R_{a}{b}"));
                }
            }
            let mut cols = vec![(0..=n).map(|i| i as f64).collect::<Vec<_>>()];
            for a in 0..d {
                for b in 0..d {
                    cols.push(r.iter().map(|m| m[(a, b)]).collect());
                }
            }
            let refs: Vec<&str> = names.iter().map(String::as_str).collect();
            export::write_columns(create(out, "resolvent.csv")?, &refs, &cols)?;
            report["kind"] = json!("discrete");
            report["residual"] = json!(svlab::discrete::resolvent_residual(&k.build(d)?, &r));
        }
        _ => {
            return Err(CliError::Config(
                "invalid key `kernel`: give exactly one of `kernel` or `discrete_kernel`".into(),
            ))
        }
    }
    write_json(out, "report.json", &report)?;
    write_manifest(out, cfg.seed, &canonical(&cfg), Norm::default())?;
    Ok(report)
}

fn step_of(cfg: &CheckConfig) -> f64 {
    cfg.grid.map_or(1e-3, |g| g.step_h)
}

/// Runs condition `id`; the verdict is data and never an error.
pub fn check_cmd(id: &str, mut cfg: CheckConfig, seed: Option<u64>, out: &Path) -> Result<Value, CliError> {
    if !CHECK_IDS.contains(&id) {
        return Err(CliError::Config(format!(
            "unknown condition id `{id}`; expected one of {}",
            CHECK_IDS.join(", ")
        )));
    }
    check_schema(&cfg.schema)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    let thr = &cfg.thresholds;
    let report: Value = match id {
        "cond-f" => {
            let f = named_function(required(&cfg.function, "function", id)?, "function")?;
            let p = *required(&cfg.p, "p", id)?;
            let grid = required(&cfg.grid, "grid", id)?.build()?;
            serde_json::to_value(conditions::cond_f_evidence(f.as_ref(), &cfg.thetas, p, &grid, cfg.t_min, thr)?)?
        }
        "cond-sigma-high" => {
            let s = named_function(required(&cfg.sigma, "sigma", id)?, "sigma")?;
            let p = *required(&cfg.p, "p", id)?;
            let grid = required(&cfg.grid, "grid", id)?.build()?;
            serde_json::to_value(conditions::sigma_high_p_evidence(s, &cfg.thetas, p, &grid, cfg.t_min, thr)?)?
        }
        "cond-sigma-low" => {
            let s = named_function(required(&cfg.sigma, "sigma", id)?, "sigma")?;
            let p = *required(&cfg.p, "p", id)?;
            let n = *required(&cfg.n, "n", id)?;
            serde_json::to_value(conditions::sigma_low_p_evidence(s.as_ref(), p, n, cfg.n_min, step_of(&cfg), thr)?)?
        }
        "s-epsilon" => {
            let s = named_function(required(&cfg.sigma, "sigma", id)?, "sigma")?;
            let eps = required(&cfg.eps, "eps", id)?;
            let n = *required(&cfg.n, "n", id)?;
            let r = conditions::s_epsilon_series(s.as_ref(), eps, n, cfg.n_min, step_of(&cfg), thr)?;
            export::write_partial_sums(create(out, "partial_sums.csv")?, &r.partial_sums)?;
            serde_json::to_value(&r.report)?
        }
        "fading" => {
            let f = named_function(required(&cfg.function, "function", id)?, "function")?;
            let blocks = required(&cfg.blocks, "blocks", id)?;
            let step = required(&cfg.grid, "grid", id)?.step_h;
            serde_json::to_value(conditions::fading_window_check(f.as_ref(), &cfg.thetas, blocks, step, cfg.tol, thr)?)?
        }
        "lemma-p-lt-1" => {
            let f = named_function(required(&cfg.function, "function", id)?, "function")?;
            let p = *required(&cfg.p, "p", id)?;
            let grid = required(&cfg.grid, "grid", id)?.build()?;
            serde_json::to_value(conditions::exp_integrator_equiv(f.as_ref(), cfg.beta, p, &grid, cfg.t_min, thr)?)?
        }
        "irregular-windows" => {
            let f = named_function(required(&cfg.function, "function", id)?, "function")?;
            let p = *required(&cfg.p, "p", id)?;
            let a = required(&cfg.breakpoints, "breakpoints", id)?;
            let sp = required(&cfg.spacing, "spacing", id)?;
            let r = conditions::irregular_window_sums(f.as_ref(), a, sp.min, sp.max, p, step_of(&cfg), cfg.n_min, thr)?;
            export::write_partial_sums(create(out, "partial_sums.csv")?, std::slice::from_ref(&r.partial_sums))?;
            serde_json::to_value(&r.report)?
        }
        _ => unreachable!("id checked above"),
    };
    write_json(out, "report.json", &report)?;
    write_manifest(out, cfg.seed, &canonical(&cfg), Norm::default())?;
    Ok(report)
}

pub const SWEEP_COMMANDS: [&str; 5] = ["simulate-discrete", "simulate-sve", "simulate-sfde", "resolvent", "check"];

fn set_dotted(target: &mut Value, key: &str, value: Value) -> Result<(), CliError> {
    let mut cur = target;
    let parts: Vec<&str> = key.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        let obj = cur
            .as_object_mut()
            .ok_or_else(|| CliError::Config(format!("invalid key `parameter`: `{key}` does not name an object path")))?;
        if i + 1 == parts.len() {
            obj.insert(part.to_string(), value);
            return Ok(());
        }
        cur = obj.entry(part.to_string()).or_insert_with(|| json!({}));
    }
    Ok(())
}

/// Verdict string from a subcommand report, wherever it lives.
fn verdict_of(report: &Value) -> String {
    let v = report
        .get("verdict")
        .filter(|v| !v.is_null())
        .or_else(|| report.get("tail").and_then(|t| t.get("verdict")).filter(|v| !v.is_null()))
        .or_else(|| report.get("scan").and_then(|t| t.get("verdict")));
    match v {
        Some(Value::String(s)) => s.clone(),
        Some(other) => other.to_string(),
        None => String::new(),
    }
}

pub fn run_config(command: &str, check_id: Option<&str>, text: &str, seed: Option<u64>, out: &Path) -> Result<Value, CliError> {
    match command {
        "simulate-discrete" => simulate_discrete(config::parse(text)?, seed, out),
        "simulate-sve" => simulate_sve_cmd(config::parse(text)?, seed, out),
        "simulate-sfde" => simulate_sfde_cmd(config::parse(text)?, seed, out),
        "resolvent" => resolvent_cmd(config::parse(text)?, seed, out),
        "check" => {
            let id = check_id.ok_or_else(|| CliError::Config("invalid key `check_id`: missing field `check_id`".into()))?;
            if !CHECK_IDS.contains(&id) {
                return Err(CliError::Config(format!("unknown condition id `{id}`")));
            }
            check_cmd(id, config::parse(text)?, seed, out)
        }
        other => Err(CliError::Config(format!(
            "invalid key `command`: unknown subcommand `{other}`; expected one of {}",
            SWEEP_COMMANDS.join(", ")
        ))),
    }
}

pub fn sweep_cmd(cfg: SweepConfig, seed: Option<u64>, out: &Path) -> Result<Value, CliError> {
    check_schema(&cfg.schema)?;
    if cfg.values.is_empty() {
        return Err(CliError::Config("invalid key `values`: the sweep needs at least one value".into()));
    }
    let mut rows = Vec::with_capacity(cfg.values.len());
    for (i, value) in cfg.values.iter().enumerate() {
        let mut base = cfg.base.clone();
        set_dotted(&mut base, &cfg.parameter, value.clone())?;
        let dir = out.join(format!("run-{i:03}"));
        let report = run_config(&cfg.command, cfg.check_id.as_deref(), &base.to_string(), seed, &dir)?;
        rows.push(json!({"index": i, "value": value, "dir": format!("run-{i:03}"), "verdict": verdict_of(&report)}));
    }
    let mut w = create(out, "sweep.csv")?;
    writeln!(w, "index,value,verdict")?;
    for r in &rows {
        let value = r["value"].to_string().replace('"', "\"\"");
        writeln!(w, "{},\"{}\",{}", r["index"], value, r["verdict"].as_str().unwrap_or(""))?;
    }
    w.flush()?;
    let report = json!({"command": "sweep", "parameter": cfg.parameter, "runs": rows});
    write_json(out, "report.json", &report)?;
    write_manifest(out, seed.unwrap_or(0), &canonical(&cfg), Norm::default())?;
    Ok(report)
}
