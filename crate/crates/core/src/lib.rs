// NaN-rejecting checks are written as `!(x > 0.0)` on purpose; the spectral
// kernels index several arrays per loop.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod cli;
pub mod curve;
pub mod diagnostics;
pub mod error;
pub mod evolve;
pub mod fourier;
pub mod io;
pub mod profile;
pub mod shooting;

pub use error::{Error, Result};
