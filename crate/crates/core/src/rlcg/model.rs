use alloc::vec::Vec;

use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::frequency::FrequencyGrid;
use crate::geometry::GeometryMaterials;
use crate::layout::{pairwise_distances, TsvLayout};
use crate::linalg::RMat;
use crate::rlcg::bessel::internal_impedance;
use crate::rlcg::depletion::depletion_thickness;
use crate::rlcg::inductance::{
    default_reference, imd_capacitance, oxide_depletion_capacitance, partial_inductance_matrix, schur_reduce,
    substrate_cg,
};
use crate::C64;

/// Lumped top-side IMD capacitor between two signal TSVs (indices into the
/// signal list).
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ImdCoupling {
    pub a: usize,
    pub b: usize,
    pub capacitance_f: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Conductor {
    pub radius_m: f64,
    pub sigma: f64,
    pub mu_r: f64,
}

impl Conductor {
    pub fn internal_impedance(&self, omega: f64) -> Result<C64> {
        internal_impedance(omega, self.radius_m, self.sigma, self.mu_r)
    }
}

/// Reduced per-unit-length model of a layout. Matrices are indexed by the
/// signal TSVs in ascending cell order.
#[derive(Debug, Clone, PartialEq)]
pub struct RlcgModel {
    pub signal_cells: Vec<usize>,
    pub ground_cells: Vec<usize>,
    pub reference_cell: usize,
    /// Cells indexing `l_partial` (all occupied cells but the reference).
    pub partial_cells: Vec<usize>,
    pub l_partial: RMat,
    /// H/m
    pub l_eff: RMat,
    /// F/m
    pub c_sub_eff: RMat,
    /// S/m
    pub g_sub_eff: RMat,
    /// F/m, one entry per signal TSV.
    pub c_oxdep: Vec<f64>,
    pub t_dep_um: f64,
    pub imd: Vec<ImdCoupling>,
    pub conductor: Conductor,
    pub frequencies: Vec<f64>,
    /// Ω/m at each tabulated frequency.
    pub z_cond: Vec<C64>,
    pub h_int_m: f64,
    pub ground_condition: f64,
}

impl RlcgModel {
    pub fn signal_count(&self) -> usize {
        self.signal_cells.len()
    }

    pub fn z_cond_at(&self, omega: f64) -> Result<C64> {
        let f = omega / (2.0 * PI);
        if let Some(i) = self.frequencies.iter().position(|&p| p == f) {
            return Ok(self.z_cond[i]);
        }
        self.conductor.internal_impedance(omega)
    }

    /// Same model with a different conductor conductivity (used by the
    /// electrothermal loop).
    pub fn with_conductor_conductivity(&self, sigma: f64) -> Result<RlcgModel> {
        let mut m = self.clone();
        m.conductor.sigma = sigma;
        m.z_cond = m
            .frequencies
            .iter()
            .map(|&f| m.conductor.internal_impedance(2.0 * PI * f))
            .collect::<Result<_>>()?;
        Ok(m)
    }

    /// Symmetric IMD capacitance matrix (F) over signal indices, Laplacian
    /// form: each coupling adds `C` to both diagonals and `-C` off-diagonal.
    pub fn imd_matrix(&self) -> RMat {
        let n = self.signal_count();
        let mut m = RMat::zeros(n, n);
        for c in &self.imd {
            m[(c.a, c.a)] += c.capacitance_f;
            m[(c.b, c.b)] += c.capacitance_f;
            m[(c.a, c.b)] -= c.capacitance_f;
            m[(c.b, c.a)] -= c.capacitance_f;
        }
        m
    }
}

/// Pairs of signal TSVs within one diagonal pitch of each other.
pub fn adjacent_signal_pairs(layout: &TsvLayout, g: &GeometryMaterials) -> Result<Vec<(usize, usize, f64)>> {
    let signals = layout.signal_cells();
    let mut out = Vec::new();
    if signals.len() < 2 {
        return Ok(out);
    }
    let dist = pairwise_distances(layout, g)?;
    let limit = g.p_int_um * 2f64.sqrt() * (1.0 + 1e-9);
    for a in 0..signals.len() {
        for b in (a + 1)..signals.len() {
            let d = dist.between_cells(signals[a], signals[b]).expect("occupied");
            if d <= limit {
                out.push((a, b, d));
            }
        }
    }
    Ok(out)
}

pub fn extract_rlcg(layout: &TsvLayout, g: &GeometryMaterials, grid: &FrequencyGrid) -> Result<RlcgModel> {
    extract_rlcg_with_reference(layout, g, grid, None)
}

/// As [`extract_rlcg`] but with an explicit reference ground cell.
pub fn extract_rlcg_with_reference(
    layout: &TsvLayout,
    g: &GeometryMaterials,
    grid: &FrequencyGrid,
    reference: Option<usize>,
) -> Result<RlcgModel> {
    g.validate()?;
    layout.ensure_solvable()?;
    let reference = match reference {
        Some(r) => r,
        None => default_reference(layout).ok_or(Error::Unsolvable("layout has no ground TSV"))?,
    };
    let partial = partial_inductance_matrix(layout, g, reference)?;
    let signal_cells = layout.signal_cells();
    let ground_cells = layout.ground_cells();
    let keep: Vec<usize> = (0..partial.cells.len()).filter(|&i| signal_cells.contains(&partial.cells[i])).collect();
    let eliminate: Vec<usize> = (0..partial.cells.len()).filter(|&i| !keep.contains(&i)).collect();
    let reduction = schur_reduce(&partial.matrix, &keep, &eliminate)?;
    let l_eff = reduction.matrix;
    let (c_sub_eff, g_sub_eff) = substrate_cg(&l_eff, g)?;

    let t_dep_um = depletion_thickness(g)?;
    let c_ox = oxide_depletion_capacitance(g, t_dep_um)?;

    let imd = adjacent_signal_pairs(layout, g)?
        .into_iter()
        .map(|(a, b, d)| Ok(ImdCoupling { a, b, capacitance_f: imd_capacitance(d, g)? }))
        .collect::<Result<Vec<_>>>()?;

    let conductor = Conductor { radius_m: g.r_cond_m(), sigma: g.sigma_cu, mu_r: g.mu_r_cond };
    let z_cond = grid
        .points()
        .iter()
        .map(|&f| conductor.internal_impedance(2.0 * PI * f))
        .collect::<Result<Vec<_>>>()?;

    Ok(RlcgModel {
        c_oxdep: alloc::vec![c_ox; signal_cells.len()],
        signal_cells,
        ground_cells,
        reference_cell: reference,
        partial_cells: partial.cells,
        l_partial: partial.matrix,
        l_eff,
        c_sub_eff,
        g_sub_eff,
        t_dep_um,
        imd,
        conductor,
        frequencies: grid.points().to_vec(),
        z_cond,
        h_int_m: g.h_int_m(),
        ground_condition: reduction.eliminated_condition,
    })
}
