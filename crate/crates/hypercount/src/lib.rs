//! Exact and asymptotic enumeration of connected 3-uniform hypergraphs with
//! `N` vertices and `M = N/2 + R` edges.
//!
//! The crate is organised bottom-up:
//!
//! * [`special_fn`]: truncated exponentials `f_k`, shifted exponentials `g_k`
//!   and the entropy helper `h`.
//! * [`solvers`]: one-dimensional root finders for the fixed-point equations.
//! * [`tpoisson`]: the truncated Poisson law and conditioned-sum probabilities.
//! * [`hypergraph_model`]: hypergraphs, multigraphs, core peeling and kernels.
//! * [`exact_enum`]: arbitrary-precision counting and brute-force oracles.
//! * [`asymptotics`]: exponent functions, optima, Hessians and count estimates.
//! * [`sampler`]: configuration-model generators and Monte-Carlo estimators.
//! * [`validation`]: the acceptance checks shared by the CLI and the test suite.

pub mod asymptotics;
pub mod exact_enum;
pub mod hypergraph_model;
pub mod sampler;
pub mod solvers;
pub mod special_fn;
pub mod tpoisson;
pub mod validation;

mod error;
mod serde_big;

pub use error::{Error, Result};
