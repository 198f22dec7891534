//! Exact tools for superadditive divisorial systems over monoids: cone and
//! monoid combinatorics, straightening and piecewise-linear detection,
//! simultaneous Diophantine approximation, and finite generation checks on
//! affine curves.

pub mod arith;
pub mod curve;
pub mod diophantine;
pub mod error;
pub mod expr;
pub mod lattice_cone;
pub mod linalg;
pub mod scenario;
pub mod superlinear;

pub use error::{Error, Result};
