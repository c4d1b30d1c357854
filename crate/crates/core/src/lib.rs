//! Electro-thermal modelling and layout optimization for arrays of
//! through-substrate vias (TSVs).
//!
//! The crate is `no_std` (it needs `alloc`) so the numerical core can be
//! embedded anywhere; file formats, parallel orchestration and the command
//! line live in the companion `tsvnet` crate.
//!
//! Module map:
//!
//! * [`layout`], [`symmetry`], [`geometry`], [`frequency`]: the data model
//!   (signal/ground grids, D4 symmetry, technology constants, sweeps).
//! * [`rlcg`]: per-unit-length RLCG extraction with ground elimination.
//! * [`em`]: multiconductor line solution, S-parameters and crosstalk metrics.
//! * [`thermal`]: homogenized conductivities, heat sources, finite-difference
//!   steady state and the electrothermal fixed point.
//! * [`optimizer`]: layout enumeration, symmetry reduction, objectives and
//!   Pareto extraction.

#![no_std]
#![forbid(unsafe_op_in_unsafe_fn)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod em;
pub mod error;
pub mod frequency;
pub mod geometry;
pub mod layout;
pub mod linalg;
pub mod optimizer;
pub mod rlcg;
pub mod symmetry;
pub mod thermal;

pub use error::{Error, Result};
pub use frequency::FrequencyGrid;
pub use geometry::GeometryMaterials;
pub use layout::{Role, TsvLayout};
pub use symmetry::D4Transform;

/// Complex scalar used throughout the electrical code.
pub type C64 = num_complex::Complex64;
