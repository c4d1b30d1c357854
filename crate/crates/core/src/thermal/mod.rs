//! Homogenized thermal model of a TSV array: unit-cell and array
//! conductivities, heat sources from S-parameter losses, a finite-volume
//! steady-state solver and the electrothermal fixed point.

pub mod coupled;
pub mod etc;
pub mod fd;
pub mod sources;

pub use coupled::{electrothermal_fixed_point, ElectrothermalSolution, Excitation};
pub use etc::{
    array_etc, lateral_unit_etc, unit_cell_areas, vertical_unit_etc, volumetric_heat_capacity, ThermalBlock,
    UnitCellAreas,
};
pub use fd::{solve_steady_state, GridResolution, TemperatureField};
pub use sources::{heat_sources_from_s, Boundary, FaceBoundaries, HeatSource, HeatSourceField, ThermalEnvironment};
