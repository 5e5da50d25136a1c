//! Monogenic and harmonic kernels on conformally flat quotient manifolds.

pub mod calculus;
pub mod clifford;
pub mod conformal;
pub mod error;
pub mod kernels_euclid;
pub mod kernels_periodic;
pub mod kernels_pin;
pub mod lattice;
pub mod quadrature;

pub use error::{Error, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
