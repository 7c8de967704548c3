//! Numerical laboratory for ICA models whose error laws are contaminated
//! Gaussians, `beta * xi + (1 - beta) * zeta`.
//!
//! The crate evaluates distribution functions of `A * eps` for 2x2 mixing
//! matrices, expands them as polynomials in the contamination level, and
//! runs Kolmogorov-norm Monte Carlo experiments on whether two mixing
//! matrices with the same `A A^t` can be told apart as the contamination
//! vanishes with the sample size.

pub mod cdf_engine;
pub mod config;
pub mod distributions;
pub mod empirical;
pub mod error;
pub mod limitfield;
pub mod montecarlo;
pub mod quadrature;
pub mod rng;
pub mod signed_measure;
pub mod special;
pub mod svg;
pub mod verify;

pub use error::{Error, Result};
