//! Excitation Hamiltonians of the bosonic Kitaev chain and its
//! two-sublattice (SSH-like) variant.
//!
//! Matrices are dense and use one basis ordering throughout: flat index
//! `2j+s` for the plain chain and `4j+2S+s` for the two-sublattice chain,
//! with `s = 0, 1` for the x and p quadratures and `S = 0, 1` for sublattices
//! A and B.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod disorder;
pub mod error;
pub mod floquet;
pub mod model;
mod pauli;
pub mod skin;
pub mod spectral;
pub mod topology;
pub mod transform;

pub use error::{Error, Result};
pub use faer::c64;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
