//! Multiconductor line solution of the reduced RLCG model: per-unit-length
//! matrices, chain matrices, S-parameters and the electrical metrics.

pub mod chain;
pub mod lumped;
pub mod metrics;
pub mod modal;
pub mod pul;
pub mod sparams;
pub mod sweep;

pub use chain::{mtl_chain, ChainMatrix};
pub use lumped::{lumped_oracle, lumped_oracle_model};
pub use metrics::{
    average_crosstalk, crosstalk_report, max_reflection_db, mean_insertion_db, to_db, victim_total_crosstalk,
    CrosstalkReport,
};
pub use pul::per_unit_length_matrices;
pub use sparams::{chain_to_s, passivity_margin, rfe, PortLabel, SParameterBlock, Side, DEFAULT_Z_REF};
pub use sweep::{solve_model_sweep, solve_sweep, SolverPath, SweepSolver};
