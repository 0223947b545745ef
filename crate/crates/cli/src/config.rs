//! JSON experiment configurations, schema `svlab/1`.
//!
//! Every struct rejects unknown keys. After parsing, the typed value is
//! serialised again so the digest covers defaulted fields too.

use std::sync::Arc;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use svlab::continuous::{OuScheme, ScanRect};
use svlab::corpus::parse_function;
use svlab::discrete::{Initial, MatrixSeq};
use svlab::func::SharedFn;
use svlab::kernel::{GeometricTail, KernelSeq};
use svlab::noise::{NoiseFamily, NoiseSpec};
use svlab::{Atom, Density, GridSpec, Matrix, MatrixFn, Norm, SignedMeasure, Support, TailThresholds, Vector, VectorFn};

use crate::error::CliError;

pub const SCHEMA: &str = "svlab/1";

/// Parses `text` as `T`, naming the offending key on failure.
pub fn parse<T: DeserializeOwned>(text: &str) -> Result<T, CliError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.inner().to_string();
        let key = match inner.strip_prefix("missing field `").and_then(|r| r.split('`').next()) {
            Some(field) if path == "." => field.to_string(),
            Some(field) => format!("{path}.{field}"),
            None => path,
        };
        CliError::Config(format!("invalid key `{key}`: {inner}"))
    })
}

pub fn check_schema(schema: &str) -> Result<(), CliError> {
    if schema == SCHEMA {
        Ok(())
    } else {
        Err(CliError::Config(format!(
            "invalid key `schema`: expected \"{SCHEMA}\", found \"{schema}\""
        )))
    }
}

fn one() -> usize {
    1
}

fn two() -> f64 {
    2.0
}

fn default_stride() -> usize {
    1
}

fn default_t_min() -> f64 {
    32.0
}

fn default_n_min() -> usize {
    32
}

fn default_tol() -> f64 {
    1e-3
}

fn default_beta() -> f64 {
    1.0
}

fn default_thetas() -> Vec<f64> {
    svlab::conditions::DEFAULT_THETAS.to_vec()
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub step_h: f64,
    #[serde(rename = "horizon_T")]
    pub horizon: f64,
}

impl GridConfig {
    pub fn build(&self) -> Result<GridSpec, CliError> {
        GridSpec::new(self.step_h, self.horizon).map_err(|e| CliError::Config(format!("invalid key `grid`: {e}")))
    }
}

/// A scalar `c` means `c` times the identity, or a column filled with `c` for
/// vectors; otherwise a list of rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MatrixValue {
    Scalar(f64),
    Rows(Vec<Vec<f64>>),
}

impl MatrixValue {
    pub fn build(&self, rows: usize, cols: usize, key: &str) -> Result<Matrix, CliError> {
        match self {
            MatrixValue::Scalar(c) if cols == 1 => Ok(Matrix::from_element(rows, 1, *c)),
            MatrixValue::Scalar(c) => Ok(Matrix::identity(rows, cols) * *c),
            MatrixValue::Rows(r) => {
                if r.len() != rows || r.iter().any(|row| row.len() != cols) {
                    return Err(CliError::Config(format!(
                        "invalid key `{key}`: expected a {rows} x {cols} matrix"
                    )));
                }
                Ok(Matrix::from_fn(rows, cols, |i, j| r[i][j]))
            }
        }
    }
}

/// One function name, or one per component.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FnList {
    One(String),
    Many(Vec<String>),
}

impl Default for FnList {
    fn default() -> Self {
        FnList::One("zero".into())
    }
}

fn function(name: &str, key: &str) -> Result<SharedFn, CliError> {
    parse_function(name)
        .map(|f| f.func)
        .map_err(|e| CliError::Config(format!("invalid key `{key}`: {e}")))
}

impl FnList {
    fn names(&self, dim: usize, key: &str) -> Result<Vec<String>, CliError> {
        match self {
            FnList::One(s) => Ok(vec![s.clone(); dim]),
            FnList::Many(v) if v.len() == dim => Ok(v.clone()),
            FnList::Many(v) => Err(CliError::Config(format!(
                "invalid key `{key}`: expected {dim} functions, found {}",
                v.len()
            ))),
        }
    }

    pub fn vector(&self, dim: usize, key: &str) -> Result<VectorFn, CliError> {
        let fs = self
            .names(dim, key)?
            .iter()
            .map(|n| function(n, key))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(VectorFn::new(fs))
    }

    /// Diagonal diffusion.
    pub fn diagonal(&self, dim: usize, key: &str) -> Result<MatrixFn, CliError> {
        let names = self.names(dim, key)?;
        if names.iter().all(|n| n == "zero") {
            return Ok(MatrixFn::zero(dim, dim));
        }
        let fs = names.iter().map(|n| function(n, key)).collect::<Result<Vec<_>, _>>()?;
        Ok(MatrixFn::diagonal(fs))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomConfig {
    pub location: f64,
    pub weight: MatrixValue,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DensityConfig {
    pub start: f64,
    pub cell: f64,
    pub values: Vec<MatrixValue>,
}

/// Atoms plus an optional piecewise-constant density. Setting `delay_tau`
/// places the measure on `[-τ, 0]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureConfig {
    #[serde(default)]
    pub delay_tau: Option<f64>,
    #[serde(default)]
    pub atoms: Vec<AtomConfig>,
    #[serde(default)]
    pub density: Option<DensityConfig>,
}

impl MeasureConfig {
    pub fn build(&self, dim: usize) -> Result<SignedMeasure, CliError> {
        let support = match self.delay_tau {
            Some(tau) => Support::Delay { tau },
            None => Support::HalfLine,
        };
        let atoms = self
            .atoms
            .iter()
            .enumerate()
            .map(|(i, a)| {
                Ok(Atom {
                    location: a.location,
                    weight: a.weight.build(dim, dim, &format!("kernel.atoms[{i}].weight"))?,
                })
            })
            .collect::<Result<Vec<_>, CliError>>()?;
        let density = match &self.density {
            Some(d) => Some(Density {
                start: d.start,
                cell: d.cell,
                values: d
                    .values
                    .iter()
                    .enumerate()
                    .map(|(i, v)| v.build(dim, dim, &format!("kernel.density.values[{i}]")))
                    .collect::<Result<Vec<_>, _>>()?,
            }),
            None => None,
        };
        SignedMeasure::new(dim, dim, support, atoms, density)
            .map_err(|e| CliError::Config(format!("invalid key `kernel`: {e}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TailConfig {
    pub base: MatrixValue,
    pub ratio: f64,
}

/// `K(0), K(1), ...` listed explicitly, optionally continued geometrically.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelSeqConfig {
    #[serde(default)]
    pub explicit: Vec<MatrixValue>,
    #[serde(default)]
    pub tail: Option<TailConfig>,
}

impl KernelSeqConfig {
    pub fn build(&self, dim: usize) -> Result<KernelSeq, CliError> {
        let explicit = self
            .explicit
            .iter()
            .enumerate()
            .map(|(i, m)| m.build(dim, dim, &format!("kernel.explicit[{i}]")))
            .collect::<Result<Vec<_>, _>>()?;
        let tail = match &self.tail {
            Some(t) => Some(GeometricTail {
                base: t.base.build(dim, dim, "kernel.tail.base")?,
                ratio: t.ratio,
            }),
            None => None,
        };
        KernelSeq::new(dim, explicit, tail).map_err(|e| CliError::Config(format!("invalid key `kernel`: {e}")))
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SeqConfig {
    #[default]
    Zero,
    Constant { value: MatrixValue },
    Geometric { base: MatrixValue, ratio: f64 },
    Explicit { values: Vec<MatrixValue> },
}

impl SeqConfig {
    pub fn build(&self, rows: usize, cols: usize, key: &str) -> Result<MatrixSeq, CliError> {
        Ok(match self {
            SeqConfig::Zero => MatrixSeq::Zero { rows, cols },
            SeqConfig::Constant { value } => MatrixSeq::Constant(value.build(rows, cols, key)?),
            SeqConfig::Geometric { base, ratio } => MatrixSeq::Geometric {
                base: base.build(rows, cols, key)?,
                ratio: *ratio,
            },
            SeqConfig::Explicit { values } => MatrixSeq::Explicit {
                rows,
                cols,
                values: values
                    .iter()
                    .enumerate()
                    .map(|(i, v)| v.build(rows, cols, &format!("{key}.values[{i}]")))
                    .collect::<Result<Vec<_>, _>>()?,
            },
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseConfig {
    #[serde(default = "gaussian")]
    pub family: NoiseFamily,
    #[serde(default = "default_true")]
    pub independent_components: bool,
    /// Defaults to the state dimension.
    #[serde(default)]
    pub dim: Option<usize>,
}

fn gaussian() -> NoiseFamily {
    NoiseFamily::GaussianIid
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self {
            family: gaussian(),
            independent_components: true,
            dim: None,
        }
    }
}

impl NoiseConfig {
    pub fn build(&self, state_dim: usize) -> Result<NoiseSpec, CliError> {
        NoiseSpec::new(
            self.family.clone(),
            self.independent_components,
            self.dim.unwrap_or(state_dim),
        )
        .map_err(|e| CliError::Config(format!("invalid key `noise`: {e}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InitialConfig {
    Fixed(Vec<f64>),
    Random { law: NoiseFamily },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiscreteConfig {
    pub schema: String,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "one")]
    pub paths: usize,
    #[serde(default)]
    pub norm: Norm,
    /// Exponent of the partial sums `Σ ‖X(n)‖^p`.
    #[serde(default = "two")]
    pub p: f64,
    #[serde(default)]
    pub thresholds: TailThresholds,
    #[serde(default = "one")]
    pub dim: usize,
    #[serde(rename = "horizon_N")]
    pub horizon: usize,
    pub kernel: KernelSeqConfig,
    #[serde(default)]
    pub forcing: SeqConfig,
    #[serde(default)]
    pub diffusion: SeqConfig,
    #[serde(default)]
    pub noise: NoiseConfig,
    #[serde(default)]
    pub initial: Option<InitialConfig>,
}

impl DiscreteConfig {
    pub fn system(&self) -> Result<svlab::discrete::DiscreteSystem, CliError> {
        let d = self.dim;
        let noise = self.noise.build(d)?;
        let initial = match &self.initial {
            None => None,
            Some(InitialConfig::Fixed(v)) => Some(Initial::Fixed(Vector::from_vec(v.clone()))),
            Some(InitialConfig::Random { law }) => Some(Initial::Random(
                NoiseSpec::new(law.clone(), true, d).map_err(|e| CliError::Config(format!("invalid key `initial`: {e}")))?,
            )),
        };
        svlab::discrete::DiscreteSystem::new(
            self.kernel.build(d)?,
            self.forcing.build(d, 1, "forcing")?,
            self.diffusion.build(d, noise.dim, "diffusion")?,
            noise,
            initial,
            self.horizon,
        )
        .map_err(CliError::from_core)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SveConfig {
    pub schema: String,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "one")]
    pub paths: usize,
    #[serde(default)]
    pub norm: Norm,
    /// Exponent of `∫_0^N ‖X‖^p`.
    #[serde(default = "two")]
    pub p: f64,
    #[serde(default)]
    pub thresholds: TailThresholds,
    #[serde(default = "one")]
    pub dim: usize,
    pub grid: GridConfig,
    pub kernel: MeasureConfig,
    #[serde(default)]
    pub forcing: FnList,
    #[serde(default)]
    pub diffusion: FnList,
    #[serde(default)]
    pub initial: Option<Vec<f64>>,
    /// Also simulate the OU process on the same streams.
    #[serde(default)]
    pub ou: Option<OuScheme>,
    /// Block starts for gap suprema `‖X - r*f‖` over `[s, s + gap_width]`.
    #[serde(default)]
    pub gap_blocks: Vec<f64>,
    #[serde(default = "one_f")]
    pub gap_width: f64,
    /// Write every `stride`-th node.
    #[serde(default = "default_stride")]
    pub stride: usize,
}

fn one_f() -> f64 {
    1.0
}

impl SveConfig {
    pub fn system(&self) -> Result<svlab::continuous::ContinuousSystem, CliError> {
        let d = self.dim;
        if self.kernel.delay_tau.is_some() {
            return Err(CliError::Config(
                "invalid key `kernel.delay_tau`: simulate-sve needs a kernel on [0, ∞)".into(),
            ));
        }
        svlab::continuous::ContinuousSystem::new(
            self.kernel.build(d)?,
            self.forcing.vector(d, "forcing")?,
            self.diffusion.diagonal(d, "diffusion")?,
            self.initial.as_ref().map(|v| Vector::from_vec(v.clone())),
            self.grid.build()?,
        )
        .map_err(CliError::from_core)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SfdeConfig {
    pub schema: String,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "one")]
    pub paths: usize,
    #[serde(default)]
    pub norm: Norm,
    #[serde(default = "two")]
    pub p: f64,
    #[serde(default)]
    pub thresholds: TailThresholds,
    #[serde(default = "one")]
    pub dim: usize,
    pub grid: GridConfig,
    pub kernel: MeasureConfig,
    /// Initial history `ψ` on `[-τ, 0]`.
    #[serde(default)]
    pub history: FnList,
    #[serde(default)]
    pub forcing: FnList,
    #[serde(default)]
    pub diffusion: FnList,
    #[serde(default = "default_stride")]
    pub stride: usize,
}

impl SfdeConfig {
    pub fn system(&self) -> Result<svlab::continuous::DelaySystem, CliError> {
        let d = self.dim;
        if self.kernel.delay_tau.is_none() {
            return Err(CliError::Config("invalid key `kernel.delay_tau`: missing field `delay_tau`".into()));
        }
        svlab::continuous::DelaySystem::new(
            self.kernel.build(d)?,
            self.history.vector(d, "history")?,
            self.forcing.vector(d, "forcing")?,
            self.diffusion.diagonal(d, "diffusion")?,
            self.grid.build()?,
        )
        .map_err(CliError::from_core)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanConfig {
    pub re_min: f64,
    pub re_max: f64,
    pub im_max: f64,
    #[serde(default = "default_resolution")]
    pub resolution: [usize; 2],
}

fn default_resolution() -> [usize; 2] {
    [61, 101]
}

impl ScanConfig {
    pub fn rect(&self) -> ScanRect {
        ScanRect {
            re_min: self.re_min,
            re_max: self.re_max,
            im_max: self.im_max,
        }
    }
}

/// Either a measure on a grid, or a kernel sequence up to `horizon_N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResolventConfig {
    pub schema: String,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "one")]
    pub dim: usize,
    #[serde(default)]
    pub grid: Option<GridConfig>,
    #[serde(default)]
    pub kernel: Option<MeasureConfig>,
    #[serde(default)]
    pub discrete_kernel: Option<KernelSeqConfig>,
    #[serde(default, rename = "horizon_N")]
    pub horizon: Option<usize>,
    #[serde(default)]
    pub scan: Option<ScanConfig>,
    /// Cache directory; defaults to `<out>/cache`.
    #[serde(default)]
    pub cache_dir: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpacingConfig {
    pub min: f64,
    pub max: f64,
}

/// Parameters for `check`. Which keys are required depends on the condition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckConfig {
    pub schema: String,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub function: Option<String>,
    #[serde(default)]
    pub sigma: Option<String>,
    #[serde(default)]
    pub p: Option<f64>,
    #[serde(default = "default_thetas")]
    pub thetas: Vec<f64>,
    #[serde(default)]
    pub grid: Option<GridConfig>,
    #[serde(default = "default_t_min")]
    pub t_min: f64,
    /// Number of unit windows.
    #[serde(default)]
    pub n: Option<usize>,
    #[serde(default = "default_n_min")]
    pub n_min: usize,
    #[serde(default)]
    pub eps: Option<Vec<f64>>,
    #[serde(default = "default_beta")]
    pub beta: f64,
    #[serde(default)]
    pub breakpoints: Option<Vec<f64>>,
    #[serde(default)]
    pub spacing: Option<SpacingConfig>,
    #[serde(default)]
    pub blocks: Option<Vec<f64>>,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default)]
    pub thresholds: TailThresholds,
}

pub fn required<'a, T>(value: &'a Option<T>, key: &str, id: &str) -> Result<&'a T, CliError> {
    value
        .as_ref()
        .ok_or_else(|| CliError::Config(format!("invalid key `{key}`: missing field `{key}` required by {id}")))
}

pub fn named_function(name: &str, key: &str) -> Result<Arc<dyn svlab::ScalarFunction>, CliError> {
    function(name, key)
}

/// A sweep re-runs one subcommand with `parameter` (a dotted key into
/// `base`) set to each value in turn.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub schema: String,
    pub command: String,
    #[serde(default)]
    pub check_id: Option<String>,
    pub parameter: String,
    pub values: Vec<serde_json::Value>,
    pub base: serde_json::Value,
}

/// Materialised JSON of a parsed config, used for the digest.
pub fn canonical<T: Serialize>(cfg: &T) -> serde_json::Value {
    serde_json::to_value(cfg).expect("configs always serialise")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn missing_nested_key_is_named() {
        let err = parse::<SveConfig>(r#"{"schema":"svlab/1","grid":{"horizon_T":1},"kernel":{}}"#).unwrap_err();
        assert!(err.to_string().contains("grid.step_h"), "{err}");
        let err = parse::<SveConfig>(r#"{"schema":"svlab/1","grid":{"step_h":0.1,"horizon_T":1},"kernel":{},"bogus":1}"#)
            .unwrap_err();
        assert!(err.to_string().contains("bogus"), "{err}");
    }

    #[test]
    fn defaults_are_materialised() {
        let cfg: CheckConfig = parse(r#"{"schema":"svlab/1","function":"zero"}"#).unwrap();
        let v = canonical(&cfg);
        assert_eq!(v["thetas"], serde_json::json!([0.5, 1.0, 2.0, 4.0]));
        assert_eq!(v["thresholds"]["min_paths"], 30);
    }
}
