//! Classical mechanics for Hamiltonians `H = K(p^2) + V(r)` with general
//! kinetic kernels, and numerical checks of the virial, Hellmann-Feynman and
//! comparison theorems at constant action.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dynamics;
pub mod error;
pub mod models;
pub mod quadrature;
pub mod radial;
pub mod registry;
pub mod roots;
pub mod theorems;

pub use error::{Error, Result};

/// Version of this library, recorded in run reports.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
