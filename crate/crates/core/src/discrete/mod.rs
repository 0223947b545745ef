//! The Volterra difference equation
//!
//! ```text
//! X(n+1) = X(n) + Σ_{j<=n} K(n-j) X(j) + f(n) + σ(n) ξ(n+1),   X(0) = ξ
//! ```
//!
//! with its resolvent `R`, two solvers that must agree on shared noise, the
//! class-D certificate for the noise law and ℓ^p partial sums.

mod classd;
mod solve;
mod system;

pub use classd::{
    class_d_certificate, find_class_d_certificate, ClassDCertificate, ClassDFailure, TOL_DET,
};
pub use solve::{
    draw_noise, lp_partial_sums, resolvent_residual, resolvent_seq, simulate_direct,
    simulate_direct_with, simulate_ensemble, simulate_voc, NoiseDraws, SeqPath,
};
pub use system::{DiscreteSystem, Initial, MatrixSeq};
