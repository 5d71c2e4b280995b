//! Copulas generated by univariate densities on the unit interval.
//!
//! Given a density `f` on `[0,1]`, the map `u ↦ f((u_1 + … + u_d) mod 1)`
//! is the density of a copula. This crate builds that family end to end:
//!
//! * [`generators`] — the univariate densities used as generators
//!   (uniform, piecewise staircase, triangular, beta), each with exact
//!   CDF and inverse-CDF evaluation.
//! * [`copula`] — density, CDF, partial derivatives, and exact sampling
//!   of the induced copulas, including the sign-flipped variant.
//! * [`pathology`] — a mixture of inverse-square-root spikes centered at
//!   rationals; its partial sums are proper densities whose induced
//!   copula density is finite everywhere yet unbounded on every open set.
//! * [`stats`] — empirical copula, Spearman/Kendall rank statistics,
//!   tail-decay diagnostics, and a Kolmogorov–Smirnov uniformity test.
//! * [`numerics`] — mod-1 arithmetic, singularity-tolerant tanh-sinh
//!   quadrature, the exact density of a sum of independent non-identical
//!   uniforms, and seeded Monte Carlo integration.
//!
//! The `modcop` binary exposes all of it on the command line; see [`cli`].

pub mod cli;
pub mod copula;
pub mod generators;
pub mod numerics;
pub mod pathology;
pub mod special;
pub mod stats;
pub mod verify;

use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// Input outside the documented domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A quadrature or root-finding routine ran out of budget. The best
    /// available estimate and its error bound are carried along.
    #[error("failed to converge: best estimate {best} (error ~{error_estimate})")]
    Convergence { best: f64, error_estimate: f64 },

    /// Point dimension does not match the model dimension.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// Derivative requested at a coordinate where it is not guaranteed
    /// to exist (the differentiated coordinate must lie in (0,1)).
    #[error("boundary error: coordinate {index} = {value} must lie in (0,1)")]
    Boundary { index: usize, value: f64 },

    /// Second partial derivatives are only defined for d >= 3.
    #[error("unsupported dimension: {0}")]
    UnsupportedDimension(String),

    /// An iterative search exhausted its iteration budget.
    #[error("budget exceeded: {0}")]
    Budget(String),

    /// A generator or run specification failed to parse.
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
