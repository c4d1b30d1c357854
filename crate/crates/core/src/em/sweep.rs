use alloc::vec::Vec;

use core::f64::consts::PI;

use crate::error::{Error, Result};
use crate::frequency::FrequencyGrid;
use crate::geometry::GeometryMaterials;
use crate::layout::TsvLayout;
use crate::linalg::CMat;
use crate::rlcg::{extract_rlcg, RlcgModel};
use crate::C64;

use super::chain::mtl_chain;
use super::modal::ModalSolver;
use super::pul::per_unit_length_matrices;
use super::sparams::{chain_to_s, passivity_margin, reciprocity_error, SParameterBlock, DEFAULT_Z_REF};

pub const RECIPROCITY_TOL: f64 = 1e-10;
pub const PASSIVITY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum SolverPath {
    /// Modal when the model decouples, chain matrices otherwise.
    #[default]
    Auto,
    Modal,
    /// Dense chain matrices with the IMD shunt stamped at the top ports.
    Chain,
}

/// Reusable per-frequency solver for one extracted model.
#[derive(Debug, Clone)]
pub struct SweepSolver {
    model: RlcgModel,
    modal: Option<ModalSolver>,
    z_ref: f64,
}

impl SweepSolver {
    pub fn new(model: RlcgModel, path: SolverPath) -> Result<Self> {
        Self::with_reference_impedance(model, path, DEFAULT_Z_REF)
    }

    pub fn with_reference_impedance(model: RlcgModel, path: SolverPath, z_ref: f64) -> Result<Self> {
        if !(z_ref > 0.0) {
            return Err(Error::param("z_ref", alloc::format!("reference impedance must be > 0, got {z_ref}")));
        }
        let modal = match path {
            SolverPath::Chain => None,
            SolverPath::Modal => Some(ModalSolver::new(&model, z_ref)?),
            SolverPath::Auto => ModalSolver::new(&model, z_ref).ok(),
        };
        Ok(SweepSolver { model, modal, z_ref })
    }

    pub fn model(&self) -> &RlcgModel {
        &self.model
    }

    pub fn z_ref(&self) -> f64 {
        self.z_ref
    }

    pub fn is_modal(&self) -> bool {
        self.modal.is_some()
    }

    /// S-matrix at one frequency, checked for reciprocity and passivity.
    pub fn solve_at(&self, f_hz: f64) -> Result<CMat> {
        self.solve_unchecked(f_hz).and_then(check_invariants).map_err(|e| e.at_frequency(f_hz))
    }

    fn solve_unchecked(&self, f_hz: f64) -> Result<CMat> {
        let omega = 2.0 * PI * f_hz;
        match &self.modal {
            Some(m) => m.solve(omega, self.model.z_cond_at(omega)?),
            None => chain_solution(&self.model, omega, self.z_ref),
        }
    }

    pub fn solve_grid(&self, grid: &FrequencyGrid) -> Result<SParameterBlock> {
        let data = grid.points().iter().map(|&f| self.solve_at(f)).collect::<Result<Vec<_>>>()?;
        self.assemble(grid, data)
    }

    pub fn assemble(&self, grid: &FrequencyGrid, data: Vec<CMat>) -> Result<SParameterBlock> {
        SParameterBlock::new(grid.clone(), &self.model.signal_cells, data, self.z_ref)
    }
}

fn check_invariants(s: CMat) -> Result<CMat> {
    if s.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(Error::InvalidResult("non-finite S-parameters".into()));
    }
    let recip = reciprocity_error(&s);
    if !(recip < RECIPROCITY_TOL) {
        return Err(Error::InvalidResult(alloc::format!("reciprocity error {recip:e}")));
    }
    let margin = passivity_margin(&s);
    if margin > PASSIVITY_TOL {
        let port = s
            .row_iter()
            .map(|r| r.iter().map(|z| z.norm_sqr()).sum::<f64>())
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .map_or(0, |(i, _)| i);
        return Err(Error::PassivityViolation { port, deficit: margin });
    }
    Ok(s)
}

/// Dense route: chain matrix of the line, IMD admittance stamped across the
/// top ports, then conversion to S.
pub fn chain_solution(model: &RlcgModel, omega: f64, z_ref: f64) -> Result<CMat> {
    let (z, y) = per_unit_length_matrices(model, omega)?;
    let chain = mtl_chain(&z, &y, model.h_int_m)?;
    let shunt = model.imd_matrix().map(|c| C64::new(0.0, omega * c));
    chain_to_s(&chain.with_top_shunt(&shunt), z_ref)
}

pub fn solve_model_sweep(model: &RlcgModel, grid: &FrequencyGrid, path: SolverPath) -> Result<SParameterBlock> {
    SweepSolver::new(model.clone(), path)?.solve_grid(grid)
}

/// Extracts the RLCG model and solves every grid point.
pub fn solve_sweep(layout: &TsvLayout, g: &GeometryMaterials, grid: &FrequencyGrid) -> Result<SParameterBlock> {
    let model = extract_rlcg(layout, g, grid)?;
    SweepSolver::new(model, SolverPath::Auto)?.solve_grid(grid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::em::metrics::to_db;
    use crate::em::sparams::rfe;

    #[test]
    fn pair_is_nearly_transparent_at_1ghz() {
        let l = TsvLayout::build(1, 2, &[0], &[1]).unwrap();
        let s = solve_sweep(&l, &GeometryMaterials::default(), &FrequencyGrid::single(1e9).unwrap()).unwrap();
        assert_eq!(s.port_count(), 2);
        let s21 = to_db(s.data[0][(1, 0)].norm());
        assert!(s21 > -0.5 && s21 < 0.0, "{s21}");
    }

    #[test]
    fn modal_and_chain_paths_agree() {
        let l = TsvLayout::build(3, 3, &[0, 1, 4, 6, 8], &[2, 3, 5, 7]).unwrap();
        let grid = FrequencyGrid::linear(1e9, 100e9, 12).unwrap();
        let m = extract_rlcg(&l, &GeometryMaterials::default(), &grid).unwrap();
        let a = solve_model_sweep(&m, &grid, SolverPath::Modal).unwrap();
        let b = solve_model_sweep(&m, &grid, SolverPath::Chain).unwrap();
        assert!(rfe(&a, &b).unwrap() < 1e-9, "{}", rfe(&a, &b).unwrap());
    }

    #[test]
    fn unequal_liner_capacitance_uses_chain() {
        let l = TsvLayout::build(2, 2, &[0, 3], &[1, 2]).unwrap();
        let grid = FrequencyGrid::single(10e9).unwrap();
        let mut m = extract_rlcg(&l, &GeometryMaterials::default(), &grid).unwrap();
        m.c_oxdep[1] *= 1.5;
        assert!(SweepSolver::new(m.clone(), SolverPath::Modal).is_err());
        let s = SweepSolver::new(m, SolverPath::Auto).unwrap();
        assert!(!s.is_modal());
        s.solve_grid(&grid).unwrap();
    }
}
