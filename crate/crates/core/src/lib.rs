//! Finite element and Trefftz discretizations of the Helmholtz equation at
//! high wavenumber, with the experiment harness used to study pollution,
//! stability and convergence.

pub mod analysis;
pub mod assembly;
pub mod error;
pub mod experiment;
pub mod mesh;
pub mod methods;
pub mod numerics;
pub mod spaces;

pub use error::{Error, Result};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;
