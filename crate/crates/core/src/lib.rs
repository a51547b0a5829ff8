//! Constructible complexes of cellular sheaves on finite stratified posets.
//!
//! Everything is exact: coefficients are rational numbers and every
//! vanishing statement reduces to a rank computation. The crate is
//! `no_std` (it only needs `alloc`).
//!
//! Module map:
//!
//! - [`linalg`]: sparse rational matrices, cochain complexes, chain maps,
//!   cones and total complexes.
//! - [`poset`]: the stratified face poset with its upper and lower
//!   filtrations.
//! - [`sheaf`]: bounded complexes of cellular sheaves, constructors,
//!   truncation, pushforward along open inclusions and the Deligne
//!   intersection complex.
//! - [`derived`]: derived sections over opens, stalks, costalks, local
//!   cohomology and hypercohomology.
//! - [`perversity`]: the support and cosupport conditions in their
//!   stalkwise, stratumwise and filtration forms.
//! - [`fixtures`]: small stratified spaces used throughout the tests.
#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod derived;
pub mod error;
pub mod fixtures;
pub mod linalg;
pub mod perversity;
pub mod poset;
pub mod sheaf;

pub use error::{Error, Result};
pub use linalg::{ChainMap, CochainComplex, CohomologyTable, RatMatrix, Rational};
pub use poset::{CellId, CellSet, FiltrationKind, StratifiedPoset, StratumId};
pub use sheaf::{SheafComplex, SheafMap};
