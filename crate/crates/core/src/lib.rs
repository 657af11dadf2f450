//! Dickman-type densities through multiple polylogarithms, with a
//! high-precision evaluator, asymptotic analysis and a rough-number sieve.

pub mod analysis;
pub mod consts;
pub mod dickman;
pub mod error;
pub mod furry;
pub mod mpl;
pub mod polylog;
pub mod precision;
pub mod quad;
pub mod series;
pub mod sieve;

pub use error::{Error, Result};
pub use precision::{BigReal, Precision};
