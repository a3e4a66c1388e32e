//! Kernels, matrix kernels and edge limits of the elliptic Ginibre ensembles
//! for Dyson index 1, 2 and 4, plus a Monte Carlo sampler to test them.

// Links the system OpenBLAS, which provides LAPACK.
extern crate openblas_src;

pub mod error;
pub mod finite_n;
pub mod limits;
pub mod quad;
pub mod sampler;
pub mod specfun;

pub use error::{GekError, Result};
pub use num_complex::Complex64;

/// A point in the complex eigenvalue plane.
pub type ComplexPoint = Complex64;
