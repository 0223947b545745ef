//! Continuous-time equations on a uniform grid:
//!
//! ```text
//! dX(t) = (f(t) + ∫_[0,t] ν(ds) X(t-s)) dt + σ(t) dB(t)        (SVE)
//! dY(t) = (f(t) - Y(t)) dt + σ(t) dB(t),   Y(0) = 0             (OU)
//! dX(t) = (f(t) + ∫_[-τ,0] μ(ds) X(t+s)) dt + σ(t) dB(t)       (SFDE)
//! ```
//!
//! All schemes are Euler–Maruyama with the measure reduced to grid weights
//! (see [`crate::measure::SignedMeasure::discretize`]). Forcing enters
//! through its cell integrals and diffusion through per-cell multipliers.

mod delay;
mod resolvent;
mod sve;
mod system;

pub use delay::{
    characteristic_det, functional_resolvent, simulate_sfde, v0_scan, DelaySystem, RootScan,
    ScanRect, StabilityVerdict,
};
pub use resolvent::{
    differential_resolvent, f3_transform, pathwise_gap, r_conv_f, resolvent_entry, BlockSup,
    GapProfile,
};
pub use sve::{
    lp_path_integrals, simulate_coupled, simulate_ou, simulate_ou_cells, simulate_sve, CoupledPaths,
    OuScheme,
};
pub use system::{CellInputs, ContinuousSystem};
