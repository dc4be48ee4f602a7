//! Random permutations whose cycles are no longer than `alpha(n)`.
//!
//! The crate provides exact counting and exact finite-`n` cycle-count laws
//! ([`exact_counts`]), the saddle-point equation and its moments
//! ([`saddle`]), the general saddle-point coefficient estimate with a
//! contour-quadrature check ([`asymptotics`]), exact samplers for the cycle
//! type ([`sampler`]) and the statistics used to test limit theorems on
//! samples ([`statistics`]).

pub mod asymptotics;
pub mod error;
pub mod exact_counts;
pub mod numeric;
pub mod saddle;
pub mod sampler;
pub mod statistics;

pub use error::{Error, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
