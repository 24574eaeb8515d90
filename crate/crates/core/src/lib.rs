//! Curvature algebra of four-dimensional Riemannian manifolds.

pub mod berger;
pub mod duality;
pub mod error;
pub mod io;
pub mod models;
pub mod numeric;
pub mod positivity;
pub mod quadratic;
pub mod so4opt;
pub mod tensor;

pub use error::{Error, Result};
pub use tensor::{AlgCurvature4, SymBilinear4, Tensor4};
