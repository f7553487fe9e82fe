//! Minimal graphs over the hyperbolic plane in the universal cover of PSL₂(R).

pub mod domain;
pub mod error;
pub mod flux;
pub mod geometry;
pub mod hyperbolic;
pub mod invariant;
pub mod jenkins_serrin;
pub mod linalg;
pub mod mesh;
pub mod quadrature;
pub mod solver;

pub use error::{Error, Result};
