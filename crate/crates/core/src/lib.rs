//! Numerical laboratory for the local CR geometry of strictly pseudoconvex hypersurfaces
//! and of CR maps between them.

// index loops mirror the tensor formulas; negated comparisons are NaN-aware on purpose
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod corpus;
pub mod cr;
pub mod error;
pub mod forms;
pub mod immersion;
pub mod jet;
pub mod pseudoconformal;
pub mod pseudohermitian;
pub mod qframe;
#[cfg(test)]
mod testutil;

pub use error::{Error, Result};
