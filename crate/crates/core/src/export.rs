//! CSV writers. Every file starts with a header row; numbers are written with
//! Rust's shortest round-trip formatting so reruns are byte-identical.

use std::io::Write;

use crate::discrete::SeqPath;
use crate::error::Result;
use crate::grid::GridPath;

fn state_header(first: &[&str], prefix: &str, dim: usize) -> Vec<String> {
    first
        .iter()
        .map(|s| s.to_string())
        .chain((1..=dim).map(|i| format!("{prefix}_{i}")))
        .collect()
}

/// `path_index,n,X_1..X_d`, one row per path and time index.
pub fn write_seq_paths<W: Write>(out: W, paths: &[SeqPath]) -> Result<()> {
    let dim = paths.first().map_or(1, |p| p.dim());
    let mut w = csv::Writer::from_writer(out);
    w.write_record(state_header(&["path_index", "n"], "X", dim))?;
    let mut row = Vec::with_capacity(dim + 2);
    for (i, p) in paths.iter().enumerate() {
        for n in 0..p.len() {
            row.clear();
            row.push(i.to_string());
            row.push(n.to_string());
            row.extend(p.at(n).iter().map(f64::to_string));
            w.write_record(&row)?;
        }
    }
    w.flush()?;
    Ok(())
}

/// `path_index,N,S`.
pub fn write_partial_sums<W: Write>(out: W, sums: &[Vec<f64>]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["path_index", "N", "S"])?;
    for (i, s) in sums.iter().enumerate() {
        for (n, v) in s.iter().enumerate() {
            w.write_record([i.to_string(), n.to_string(), v.to_string()])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// `path_index,t,X_1..X_d` at every `stride`-th node; history nodes are
/// written with negative `t` when `with_history` is set.
pub fn write_grid_paths<W: Write>(out: W, paths: &[GridPath], with_history: bool, stride: usize) -> Result<()> {
    let stride = stride.max(1) as isize;
    let dim = paths.first().map_or(1, |p| p.dim());
    let mut w = csv::Writer::from_writer(out);
    w.write_record(state_header(&["path_index", "t"], "X", dim))?;
    let mut row = Vec::with_capacity(dim + 2);
    for (i, p) in paths.iter().enumerate() {
        let lo = if with_history { -(p.history() as isize) } else { 0 };
        for k in (lo..p.len() as isize).filter(|k| k.rem_euclid(stride) == 0) {
            row.clear();
            row.push(i.to_string());
            row.push(p.grid().time_signed(k).to_string());
            row.extend(p.at_signed(k).expect("index in range").iter().map(f64::to_string));
            w.write_record(&row)?;
        }
    }
    w.flush()?;
    Ok(())
}

/// `k,t,r_11,r_12,..,r_dd` for a resolvent stored row-major per node.
pub fn write_resolvent<W: Write>(out: W, r: &GridPath) -> Result<()> {
    let d = (r.dim() as f64).sqrt().round() as usize;
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["k".to_string(), "t".to_string()];
    for a in 1..=d {
        for b in 1..=d {
            header.push(format!("r_{a}{b}"));
        }
    }
    w.write_record(&header)?;
    let mut row = Vec::with_capacity(d * d + 2);
    for k in 0..r.len() {
        row.clear();
        row.push(k.to_string());
        row.push(r.grid().time(k).to_string());
        row.extend(r.at(k).iter().map(f64::to_string));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// `path_index,t,gap`, one block of rows per gap profile.
pub fn write_gaps<W: Write>(out: W, times: &[f64], gaps: &[Vec<f64>]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["path_index", "t", "gap"])?;
    for (i, g) in gaps.iter().enumerate() {
        for (t, v) in times.iter().zip(g) {
            w.write_record([i.to_string(), t.to_string(), v.to_string()])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Named columns of equal length, e.g. a sampled curve.
pub fn write_columns<W: Write>(out: W, names: &[&str], columns: &[Vec<f64>]) -> Result<()> {
    let rows = columns.iter().map(Vec::len).min().unwrap_or(0);
    let mut w = csv::Writer::from_writer(out);
    w.write_record(names)?;
    for k in 0..rows {
        w.write_record(columns.iter().map(|c| c[k].to_string()))?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a resolvent CSV written by [`write_resolvent`] back into flat
/// row-major blocks.
pub fn read_resolvent_values<R: std::io::Read>(input: R) -> Result<(usize, Vec<f64>)> {
    let mut r = csv::Reader::from_reader(input);
    let width = r.headers()?.len().saturating_sub(2);
    let mut data = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        for field in rec.iter().skip(2) {
            data.push(field.parse::<f64>().map_err(|e| {
                crate::Error::InvalidParameter(format!("bad number {field:?} in resolvent file: {e}"))
            })?);
        }
    }
    Ok((width, data))
}
