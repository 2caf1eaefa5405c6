//! Verification suites behind the `spectral-chaos` command.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod suites;
