//! Continuous-mode photon-photon phase gates under finite system bandwidth.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// quadrature and special-function tables keep their published digits
#![allow(clippy::excessive_precision)]

pub mod cli;
pub mod copropagating;
pub mod error;
pub mod headon;
pub mod numerics;
pub mod state;

#[cfg(test)]
mod tests;

pub use error::{Error, Result};
