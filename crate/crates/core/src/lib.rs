//! QuickSort comparison-count laboratory: exact and simulated laws of the
//! comparison count `X_n`, numerics for the limiting moment generating
//! function, and evaluators for right- and left-tail bound exponents.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod bounds;
pub mod cli;
pub mod error;
pub mod exactdist;
pub mod largedev;
pub mod limitmgf;
pub mod plot;
pub mod sampler;
pub mod quad;
pub mod specfun;
pub mod verify;

pub use error::{Error, Result};
