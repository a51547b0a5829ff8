//! Exact rational linear algebra and the homological kernel built on it.

mod complex;
mod echelon;
mod matrix;
mod rational;

pub use complex::{cone, cone_maps, ChainMap, CochainComplex, CohomologyTable, DoubleComplex};
pub(crate) use complex::{cone_unchecked, degree_union, sign};
pub use echelon::Echelon;
pub use matrix::{MatrixBuilder, RatMatrix};
pub use rational::{format_rational, parse_rational, rat, Rational};
