//! Weyl sums along polynomial curves and lattice surfaces: evaluation,
//! `L^p` moments over boxes and surface measures, exact counting oracles and
//! scaling-exponent fits.

pub mod bessel;
pub mod counting;
pub mod domain;
pub mod error;
pub mod exponents;
pub mod expsum;
pub mod fit;
pub mod io;
pub mod measures;
pub mod moments;
pub mod phase;
pub mod quadrature;
pub mod recipes;
pub mod sum;
pub mod verify;

pub use domain::{Coefficients, DyadicScale, FrequencyTable, Limits, Method, MomentResult, PhaseSystem, Support, TorusBox};
pub use error::{Error, Result};
pub use num_complex::Complex64;
