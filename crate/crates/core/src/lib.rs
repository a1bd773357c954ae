//! Successful data compression probability for clustered fog radio access
//! networks: stochastic-geometry transmission success, queueing delay
//! distributions and the combined analytic and Monte Carlo pipelines.

// Negated comparisons reject NaN alongside out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod error;
pub mod geometry;
pub mod model;
pub mod numerics;
pub mod plot;
pub mod queueing;
pub mod sdcp;
pub mod sim;
pub mod stp;

pub use error::{Error, Result};
