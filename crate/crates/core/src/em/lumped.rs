//! Cascaded lumped pi-section model of the line, solved by nodal analysis.
//! Serves as an independent oracle for the distributed solution.

use core::f64::consts::PI;

use crate::error::{Error, Result};
use crate::frequency::FrequencyGrid;
use crate::geometry::GeometryMaterials;
use crate::layout::TsvLayout;
use crate::linalg::{self, cmul, CMat};
use crate::rlcg::{extract_rlcg, RlcgModel};
use crate::C64;

use super::pul::per_unit_length_matrices;
use super::sparams::admittance_to_s;

/// Port S-matrix from `n_seg` pi-sections (series `Z h/n`, shunt `Y h/2n`
/// at each end of each section), with the IMD capacitance across the top
/// ports.
pub fn lumped_oracle_model(model: &RlcgModel, omega: f64, n_seg: usize, z_ref: f64) -> Result<CMat> {
    if n_seg == 0 {
        return Err(Error::param("n_seg", "at least one section is required"));
    }
    let n = model.signal_count();
    let (z, y) = per_unit_length_matrices(model, omega)?;
    let dh = model.h_int_m / n_seg as f64;
    let ys = linalg::invert_complex(&(z * C64::new(dh, 0.0)), "section series impedance")?;
    let half = y * C64::new(dh * 0.5, 0.0);
    let imd = model.imd_matrix().map(|c| C64::new(0.0, omega * c));

    // Two-port admittance between node 0 and the current end node.
    let mut y00 = &ys + &half + imd;
    let mut y0k = -&ys;
    let mut yk0 = -&ys;
    let mut ykk = &ys + &half;
    for _ in 1..n_seg {
        let k = &ykk + &half + &ys;
        let kinv = linalg::invert_complex(&k, "interior node")?;
        let kinv_yk0 = cmul(&kinv, &yk0);
        let y0k_kinv = cmul(&y0k, &kinv);
        y00 -= cmul(&y0k, &kinv_yk0);
        let new_y0k = cmul(&y0k_kinv, &ys);
        let new_yk0 = cmul(&ys, &kinv_yk0);
        ykk = &ys + &half - cmul(&cmul(&ys, &kinv), &ys);
        y0k = new_y0k;
        yk0 = new_yk0;
    }
    let mut yp = CMat::zeros(2 * n, 2 * n);
    yp.view_mut((0, 0), (n, n)).copy_from(&y00);
    yp.view_mut((0, n), (n, n)).copy_from(&y0k);
    yp.view_mut((n, 0), (n, n)).copy_from(&yk0);
    yp.view_mut((n, n), (n, n)).copy_from(&ykk);
    admittance_to_s(&yp, z_ref)
}

pub fn lumped_oracle(layout: &TsvLayout, g: &GeometryMaterials, omega: f64, n_seg: usize) -> Result<CMat> {
    let grid = FrequencyGrid::single(omega / (2.0 * PI))?;
    let model = extract_rlcg(layout, g, &grid)?;
    lumped_oracle_model(&model, omega, n_seg, super::sparams::DEFAULT_Z_REF)
}
