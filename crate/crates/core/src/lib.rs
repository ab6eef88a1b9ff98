//! Stein operators, Meijer G densities and numerical checks for products of
//! independent beta, gamma, generalised gamma and centred normal variables.

pub mod dist;
pub mod error;
pub mod opalg;
pub mod specfun;
pub mod steinops;
pub mod steinsolve;
pub mod verify;

pub use error::{Error, Result};
