//! Exact representation counts, local densities and sphere lattice-point
//! statistics for positive definite integral quadratic forms.

pub mod arith;
pub mod eisenstein;
pub mod enumeration;
pub mod error;
pub mod forms;
pub mod gram;
pub mod harness;
pub mod interval;
pub mod local_densities;
pub mod ortho;
pub mod sphere;

pub use error::{Error, Result};
pub use forms::QuadraticForm;
