//! Numerical laboratory for perturbed linear stochastic Volterra convolution
//! equations in discrete time, continuous time and with finite delay.
//!
//! The crate is organised around the objects the equations are built from:
//!
//! * [`grid`], [`measure`], [`kernel`]: time discretisation, matrix-valued
//!   signed measures (atoms plus a piecewise-constant density) and kernel
//!   sequences.
//! * [`rng`], [`noise`]: the reproducible per-path random stream contract and
//!   the noise laws driving the discrete equation.
//! * [`discrete`]: resolvent recursion, direct and variation-of-constants
//!   solvers, class-D certificates and summability evidence.
//! * [`continuous`]: Euler–Maruyama simulation of the Volterra and delay
//!   equations, the embedded Ornstein–Uhlenbeck process, differential and
//!   functional resolvents, characteristic-root scans and pathwise gaps.
//! * [`conditions`]: rolling-window admissibility tests and related series.
//! * [`corpus`]: the spike and oscillatory perturbations with their closed
//!   forms.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cache;
pub mod conditions;
pub mod continuous;
pub mod corpus;
pub mod discrete;
pub mod ensemble;
pub mod error;
pub mod evidence;
pub mod export;
pub mod func;
pub mod grid;
pub mod kernel;
pub mod manifest;
pub mod measure;
pub mod noise;
pub mod quad;
pub mod rng;

pub use error::{Error, Result};
pub use evidence::{EvidenceReport, TailThresholds, Verdict};
pub use func::{MatrixFn, ScalarFunction, VectorFn};
pub use grid::{GridPath, GridSpec};
pub use manifest::{Norm, RunManifest};
pub use measure::{Atom, Density, SignedMeasure, Support};

/// Dense real matrix used for kernel weights and resolvents.
pub type Matrix = nalgebra::DMatrix<f64>;
/// Dense real vector used for states.
pub type Vector = nalgebra::DVector<f64>;
