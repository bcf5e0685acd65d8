//! Generators and estimators for spiral and chirp curves: box dimension,
//! Minkowski content profiles, return maps and rectifiability.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod curve;
pub mod curves;
mod error;
pub mod experiments;
pub mod fractal;
pub mod phase;

pub use curve::{Asymptote, Curve, Provenance};
pub use error::{Error, Result};
