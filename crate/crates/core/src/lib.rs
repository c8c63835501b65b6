//! Numerical core for spectral multipliers of self-adjoint operators on
//! desk-scale models: special functions, operator models with exact spectral
//! data, multiplier toolkit, functional calculus, and norm/condition scanners.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]
#![allow(clippy::needless_range_loop, clippy::too_many_arguments)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod calculus;
pub mod error;
pub mod estimate;
pub mod fft;
pub mod linalg;
pub mod models;
pub mod mult;
pub mod quad;
pub mod space;
pub mod specfun;
pub mod stats;

pub use error::{Error, Result};
