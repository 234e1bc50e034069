//! Numerical verification of the generalized Segal–Bargmann transform on
//! compact-type Lie groups.

pub mod config;
pub mod error;
pub mod flat;
pub mod geodesic;
pub mod geometry;
pub mod lie;
pub mod matfun;
pub mod par;
pub mod quadrature;
pub mod reduction;
pub mod repr;
pub mod transform;
pub mod verify;

pub use error::{Error, Result};
pub use lie::{AlgebraVector, ComplexGroupElement, Factor, GroupElement, GroupSpec, C64};
