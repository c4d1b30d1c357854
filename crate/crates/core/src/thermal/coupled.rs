//! Electrothermal fixed point: losses heat the block, the hottest node sets
//! the copper resistivity, and the line is solved again.

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::em::sparams::SParameterBlock;
use crate::em::sweep::{SolverPath, SweepSolver};
use crate::error::{Error, Result};
use crate::frequency::FrequencyGrid;
use crate::geometry::{copper_resistivity, GeometryMaterials};
use crate::layout::TsvLayout;
use crate::rlcg::extract_rlcg;

use super::etc::{array_etc, ThermalBlock};
use super::fd::{solve_steady_state, GridResolution, TemperatureField};
use super::sources::{heat_sources_from_s, HeatSourceField, ThermalEnvironment};

pub const DEFAULT_EXCITATION_HZ: f64 = 15e9;
pub const DEFAULT_INPUT_POWER_W: f64 = 0.1;
pub const TEMPERATURE_TOLERANCE_K: f64 = 0.1;
pub const MAX_ITERATIONS: usize = 20;
/// Consecutive growths of `|ΔT_max|` that count as divergence.
pub const DIVERGENCE_STREAK: usize = 3;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Excitation {
    pub frequency_hz: f64,
    pub p_in_w: f64,
    /// Driven port indices (top ports first, then bottom ports).
    pub ports: Vec<usize>,
}

impl Excitation {
    /// 100 mW at 15 GHz into the top port of signal `k`.
    pub fn single(k: usize) -> Self {
        Excitation { frequency_hz: DEFAULT_EXCITATION_HZ, p_in_w: DEFAULT_INPUT_POWER_W, ports: alloc::vec![k] }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ElectrothermalSolution {
    pub field: TemperatureField,
    pub s: SParameterBlock,
    pub sources: HeatSourceField,
    pub block: ThermalBlock,
    pub iterations: usize,
    pub converged: bool,
    /// `T_max` after every iteration (K).
    pub t_max_history: Vec<f64>,
    /// Copper conductivity used in the last electrical solve (S/m).
    pub sigma_cu: f64,
}

impl ElectrothermalSolution {
    /// `T_max` changes between iterations, the first measured from ambient.
    pub fn delta_history(&self, t_amb: f64) -> Vec<f64> {
        let mut prev = t_amb;
        self.t_max_history
            .iter()
            .map(|&t| {
                let d = t - prev;
                prev = t;
                d
            })
            .collect()
    }
}

/// Iterates electrical and thermal solves until `T_max` moves by less than
/// [`TEMPERATURE_TOLERANCE_K`] or [`MAX_ITERATIONS`] is reached.
pub fn electrothermal_fixed_point(
    layout: &TsvLayout,
    g: &GeometryMaterials,
    excitation: &Excitation,
    env: ThermalEnvironment,
    grid: GridResolution,
) -> Result<ElectrothermalSolution> {
    let f = excitation.frequency_hz;
    let freq = FrequencyGrid::single(f)?;
    let model = extract_rlcg(layout, g, &freq)?;
    let block = array_etc(layout, g)?;
    let mut sigma = 1.0 / copper_resistivity(env.t_amb);
    let mut prev_t = env.t_amb;
    let mut prev_delta = f64::INFINITY;
    let mut growth = 0;
    let mut history = Vec::new();
    loop {
        let solver = SweepSolver::new(model.with_conductor_conductivity(sigma)?, SolverPath::Auto)?;
        let s = solver.solve_grid(&freq)?;
        let sources = heat_sources_from_s(&s, f, excitation.p_in_w, &excitation.ports, g, env)?;
        let field = solve_steady_state(&block, &sources, grid)?;
        let delta = (field.t_max - prev_t).abs();
        history.push(field.t_max);
        let iterations = history.len();
        let converged = delta < TEMPERATURE_TOLERANCE_K;
        if delta > prev_delta {
            growth += 1;
            if growth >= DIVERGENCE_STREAK {
                return Err(Error::Diverged { iterations, t_max_history: history });
            }
        } else {
            growth = 0;
        }
        if converged || iterations >= MAX_ITERATIONS {
            return Ok(ElectrothermalSolution {
                field,
                s,
                sources,
                block,
                iterations,
                converged,
                t_max_history: history,
                sigma_cu: sigma,
            });
        }
        prev_t = field.t_max;
        prev_delta = delta;
        sigma = 1.0 / copper_resistivity(field.t_max);
    }
}
