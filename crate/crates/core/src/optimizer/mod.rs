//! Layout enumeration with D4 reduction, design objectives, Pareto
//! extraction, geometry sampling and the resumable exhaustive search.

pub mod enumerate;
pub mod objectives;
pub mod pareto;
pub mod sampling;
pub mod search;

pub use enumerate::{
    binomial, burnside_orbit_count, count_layouts, enumerate_layouts, mask_to_layout, symmetry_reduce, LayoutStream,
    MaskSymmetry,
};
pub use objectives::{evaluate_design, AnalyticalEvaluator, Evaluation, Evaluator, ObjectiveVector};
pub use pareto::{dominates, pareto_front};
pub use sampling::{geometric_sweep, geometry_samples, GeometricSweep, GeometryRanges, GeometryRecord, Range, Sampler};
pub use search::{combinatorial_search, design_stream, finish_search, DesignRecord, SearchConfig, SearchOutcome, SearchState};
