//! Numerical harmonic analysis on real hyperbolic space `H^n` and on `R^d`,
//! with checkers for Roe–Strichartz type eigen-sequence theorems.

pub mod boundary;
pub mod engine;
pub mod error;
pub mod euclidean;
pub mod ode;
pub mod quadrature;
pub mod space;
pub mod laplacians;
pub mod spherical;

pub use error::{LabError, LabResult};
