//! Chaotic scattering reduced to its Poincaré map.
//!
//! The crate follows one pipeline: integrate a planar Hamiltonian flow
//! ([`dynamics`]), cut it with a Poincaré section and sample the return map
//! ([`section`]), build classical weighted transfer operators ([`classical`])
//! and the finite-rank quantum transfer operator `M(z, h)` ([`quantum`]), and
//! locate zeros of `det(I - M(z))` with the argument principle
//! ([`resonances`]). The [`cli`] module wires everything to configuration
//! files and on-disk artifacts.

pub mod classical;
pub mod cli;
pub mod dynamics;
pub mod error;
pub mod linalg;
pub mod quantum;
pub mod resonances;
pub mod section;

pub use error::{Error, Result};
pub use num_complex::Complex64;
