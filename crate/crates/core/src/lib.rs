//! Conditional distributions of hop distance and Euclidean distance between
//! nodes of a two-dimensional random geometric graph, computed analytically
//! and by Monte Carlo simulation.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
#[cfg(feature = "cli")]
pub mod cli;
pub mod error;
pub mod fitting;
pub mod geometry;
pub mod mcsim;
pub mod quadrature;

pub use error::{Error, Result};
