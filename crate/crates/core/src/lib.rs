//! Multiple Wiener-Itô integrals with respect to the random spectral measure of a
//! stationary Gaussian field, and the limit theorems they describe.
//!
//! The crate covers Hermite expansions, the diagram formula on simple kernels,
//! simulation of long-range dependent Gaussian fields and their subordinated
//! block sums, fractional Brownian motion and tail bounds for chaos variables.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod chaos;
pub mod diagrams;
pub mod error;
pub mod fbm;
pub mod fields;
pub mod hermite;
pub mod io;
pub mod quad;
pub mod rng;
pub mod spectral;
pub mod stats;
pub mod tails;

pub use error::{Error, Result};
