//! Numerical laboratory for Hankel operators on standard Fock and weighted
//! Bergman spaces.

// `!(x > 0.0)` rejects NaN along with nonpositive values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotics;
pub mod error;
pub mod hankel;
pub mod ida;
pub mod lattice;
pub mod linalg;
pub mod quadrature;
pub mod rearrange;
pub mod symbol;
pub mod weights;

pub use error::{LabError, Result};
pub use symbol::Symbol;
pub use weights::{Point, WeightKind, WeightModel};
