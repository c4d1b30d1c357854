//! Per-unit-length RLCG extraction for multi-ground TSV arrays.
//!
//! Partial inductances are taken against one ground TSV (the lowest-index
//! ground cell), the remaining grounds are eliminated by a Schur complement,
//! and the substrate capacitance/conductance follow from the inverse of the
//! reduced inductance.

pub mod bessel;
pub mod depletion;
pub mod inductance;
pub mod model;

pub use bessel::conductor_internal_impedance;
pub use depletion::depletion_thickness;
pub use inductance::{
    imd_capacitance, oxide_depletion_capacitance, partial_inductance_matrix, schur_reduce, substrate_cg,
    PartialInductance, SchurReduction,
};
pub use model::{extract_rlcg, extract_rlcg_with_reference, Conductor, ImdCoupling, RlcgModel};
