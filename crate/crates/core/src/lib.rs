//! Generalized Cauchy operators for planar hypocomplex vector fields.

pub mod error;
pub mod polyalg;
pub mod structures;
pub mod charset;
pub mod loj;
pub mod quad;
pub mod cauchy;
pub mod similarity;

pub use error::{Error, Result};
pub use num_complex::Complex64;
