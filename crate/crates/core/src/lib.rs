//! Exact Gamma-calculus for symmetric Markov operators with pure point
//! spectrum, on three exactly computable models, together with Stein-type
//! distance bounds and their empirical counterparts.

pub mod error;
pub mod families;
pub mod gamma_calculus;
pub mod markov_models;
pub mod rational;
pub mod spectrum_polys;
pub mod stein_bounds;

pub use error::{ChaosError, Result};
