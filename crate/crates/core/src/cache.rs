//! On-disk resolvent cache keyed by measure digest and grid.

use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::continuous::{differential_resolvent, functional_resolvent};
use crate::error::Result;
use crate::export::{read_resolvent_values, write_resolvent};
use crate::grid::{GridPath, GridSpec};
use crate::measure::{SignedMeasure, Support};

#[derive(Debug, Clone)]
pub struct ResolventCache {
    dir: PathBuf,
}

impl ResolventCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    /// `resolvent-<sha256(measure digest, grid key)>.csv`.
    pub fn key(measure: &SignedMeasure, grid: &GridSpec) -> String {
        let mut hasher = Sha256::new();
        hasher.update(measure.digest().as_bytes());
        hasher.update(b"\n");
        hasher.update(grid.digest_key().as_bytes());
        format!("resolvent-{}.csv", hex::encode(hasher.finalize()))
    }

    pub fn path_for(&self, measure: &SignedMeasure, grid: &GridSpec) -> PathBuf {
        self.dir.join(Self::key(measure, grid))
    }

    /// The differential resolvent for kernels on `[0, ∞)` and the functional
    /// resolvent for delay kernels, read from disk when present.
    pub fn resolvent(&self, measure: &SignedMeasure, grid: &GridSpec) -> Result<(GridPath, bool)> {
        let d = measure.rows();
        let history = match measure.support() {
            Support::HalfLine => 0,
            Support::Delay { tau } => grid.snap(tau)? as usize,
        };
        let file = self.path_for(measure, grid);
        if file.exists() {
            let (width, data) = read_resolvent_values(fs::File::open(&file)?)?;
            if width == d * d && data.len() == d * d * grid.n_nodes() {
                let mut r = GridPath::zeros(*grid, history, d * d);
                for k in 0..grid.n_nodes() {
                    r.at_mut(k).copy_from_slice(&data[k * d * d..(k + 1) * d * d]);
                }
                return Ok((r, true));
            }
        }
        let r = match measure.support() {
            Support::HalfLine => differential_resolvent(measure, grid)?,
            Support::Delay { .. } => functional_resolvent(measure, grid)?,
        };
        fs::create_dir_all(&self.dir)?;
        let tmp = file.with_extension("csv.tmp");
        write_resolvent(BufWriter::new(fs::File::create(&tmp)?), &r)?;
        fs::rename(&tmp, &file)?;
        Ok((r, false))
    }
}
