//! Optimal quadrature on the uniform grid of `[0, 1]` for the space with
//! seminorm `(∫₀¹ (φ″ + φ′)² dx)^{1/2}`.
//!
//! * [`kernel`]: the kernel ψ_m, its moments, and an adaptive integrator.
//! * [`spectral`]: λ₁ and the boundary-layer amplitude K(h).
//! * [`coefficients`]: closed-form optimal weights.
//! * [`wiener_hopf`]: the stationarity system, solved densely as an oracle.
//! * [`norm`]: four evaluations of the squared error-functional norm.
//! * [`quadrature`]: applying rules, seminorms, error bounds, convergence.
//! * [`cli`]: the `optquad` command line.

// comparisons are written so that NaN falls into the error branch
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![cfg_attr(test, allow(clippy::excessive_precision))]

pub mod cli;
pub mod coefficients;
pub mod error;
pub mod kernel;
pub mod norm;
pub mod quadrature;
pub mod real;
pub mod spectral;
pub mod sum;
pub mod wiener_hopf;

pub use coefficients::{
    constraint_residuals, optimal_coefficients, theorem1_coefficients, QuadratureRule,
};
pub use error::{Error, Result};
pub use norm::{build_report, NormReport, Verdict};
pub use real::Dd;
pub use spectral::{Root, SpectralConstants};
pub use wiener_hopf::{build_system, solve_dense, SystemSolution};
