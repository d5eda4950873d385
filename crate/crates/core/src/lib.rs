//! Four fractional Laplacians on explicitly solvable domains, their harmonic
//! extensions, and numerical checks of the comparison results between them.

pub mod domain;
pub mod error;
pub mod extension;
pub mod forms;
pub mod harness;
mod par;
pub mod pointwise;
pub mod quadrature;
pub mod specfun;
pub mod spectral;
pub mod testfn;

pub use error::{Error, Result};
