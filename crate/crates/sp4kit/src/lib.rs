//! Exact and numerical kernels for degree-two Siegel Poincaré series:
//! symplectic Kloosterman sums, Smith-form coset machinery, lattice counting,
//! the Weyl-group apparatus of minimal Eisenstein series, the integral
//! transforms attached to a compactly supported test function, and a GL₂ toy
//! model. Every kernel has an independent brute-force oracle in the test suite.

pub mod arith;
pub mod counting;
pub mod error;
pub mod expsums;
pub mod gl2;
pub mod par;
pub mod poincare;
pub mod quadrature;
pub mod weyl;

pub use error::{Error, Result};
