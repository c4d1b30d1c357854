//! JSON dump of an extracted RLCG model for regression goldens. Matrices
//! are row-major nested arrays in SI units; complex values are `[re, im]`.

use serde::Serialize;
use tsvnet_core::linalg::RMat;
use tsvnet_core::rlcg::{ImdCoupling, RlcgModel};

#[derive(Debug, Serialize)]
pub struct RlcgDump<'a> {
    pub signal_cells: &'a [usize],
    pub ground_cells: &'a [usize],
    pub reference_cell: usize,
    pub partial_cells: &'a [usize],
    pub l_partial_h_per_m: Vec<Vec<f64>>,
    pub l_eff_h_per_m: Vec<Vec<f64>>,
    pub c_sub_f_per_m: Vec<Vec<f64>>,
    pub g_sub_s_per_m: Vec<Vec<f64>>,
    pub c_oxdep_f_per_m: &'a [f64],
    pub depletion_m: f64,
    pub imd: &'a [ImdCoupling],
    pub conductor_radius_m: f64,
    pub conductor_sigma_s_per_m: f64,
    pub frequencies_hz: &'a [f64],
    pub z_internal_ohm_per_m: Vec<[f64; 2]>,
    pub height_m: f64,
    pub ground_condition: f64,
}

fn rows(m: &RMat) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

impl<'a> RlcgDump<'a> {
    pub fn new(m: &'a RlcgModel) -> Self {
        RlcgDump {
            signal_cells: &m.signal_cells,
            ground_cells: &m.ground_cells,
            reference_cell: m.reference_cell,
            partial_cells: &m.partial_cells,
            l_partial_h_per_m: rows(&m.l_partial),
            l_eff_h_per_m: rows(&m.l_eff),
            c_sub_f_per_m: rows(&m.c_sub_eff),
            g_sub_s_per_m: rows(&m.g_sub_eff),
            c_oxdep_f_per_m: &m.c_oxdep,
            depletion_m: m.t_dep_um * 1e-6,
            imd: &m.imd,
            conductor_radius_m: m.conductor.radius_m,
            conductor_sigma_s_per_m: m.conductor.sigma,
            frequencies_hz: &m.frequencies,
            z_internal_ohm_per_m: m.z_cond.iter().map(|z| [z.re, z.im]).collect(),
            height_m: m.h_int_m,
            ground_condition: m.ground_condition,
        }
    }
}
