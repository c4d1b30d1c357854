//! Partial inductances against a reference TSV, ground elimination and the
//! substrate capacitance/conductance that share the same geometric factor.

use alloc::format;
use alloc::vec::Vec;

use core::f64::consts::PI;

use nalgebra::Cholesky;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::geometry::{GeometryMaterials, EPS0, MU0};
use crate::layout::{pairwise_distances, Role, TsvLayout};
use crate::linalg::{self, RMat};

/// Partial inductance matrix over every occupied cell except the reference,
/// in ascending cell order.
#[derive(Debug, Clone, PartialEq)]
pub struct PartialInductance {
    pub cells: Vec<usize>,
    pub reference: usize,
    /// H/m
    pub matrix: RMat,
}

pub fn partial_inductance_matrix(layout: &TsvLayout, g: &GeometryMaterials, reference: usize) -> Result<PartialInductance> {
    if reference >= layout.cell_count() || !layout.role(reference).is_occupied() {
        return Err(Error::param("reference", format!("cell {reference} is not an occupied TSV")));
    }
    let dist = pairwise_distances(layout, g)?;
    let cells: Vec<usize> = dist.cells().iter().copied().filter(|&c| c != reference).collect();
    let r = g.r_cond_um;
    let k = MU0 / (2.0 * PI);
    let d_ref: Vec<f64> = cells.iter().map(|&c| dist.between_cells(c, reference).expect("occupied")).collect();
    if let Some(pos) = d_ref.iter().position(|&d| !(d > 0.0)) {
        return Err(Error::param("reference", format!("cell {} coincides with the reference", cells[pos])));
    }
    let n = cells.len();
    let mut m = RMat::zeros(n, n);
    for i in 0..n {
        m[(i, i)] = k * (d_ref[i] * d_ref[i] / (r * r)).ln();
        for j in (i + 1)..n {
            let dij = dist.between_cells(cells[i], cells[j]).expect("occupied");
            if !(dij > 0.0) {
                return Err(Error::param("layout", format!("cells {} and {} coincide", cells[i], cells[j])));
            }
            let v = k * (d_ref[i] * d_ref[j] / (r * dij)).ln();
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    Ok(PartialInductance { cells, reference, matrix: m })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SchurReduction {
    pub matrix: RMat,
    /// Spectral condition number of the eliminated block (1 when empty).
    pub eliminated_condition: f64,
}

/// `L_ss - L_sg L_gg^-1 L_gs`.
pub fn schur_reduce(full: &RMat, keep: &[usize], eliminate: &[usize]) -> Result<SchurReduction> {
    let n = full.nrows();
    if full.ncols() != n {
        return Err(Error::Mismatch(format!("matrix is {}x{}", n, full.ncols())));
    }
    if let Some(&bad) = keep.iter().chain(eliminate).find(|&&i| i >= n) {
        return Err(Error::Mismatch(format!("index {bad} outside a {n}x{n} matrix")));
    }
    if keep.iter().any(|i| eliminate.contains(i)) {
        return Err(Error::Mismatch("kept and eliminated index sets overlap".into()));
    }
    let block = |rows: &[usize], cols: &[usize]| RMat::from_fn(rows.len(), cols.len(), |i, j| full[(rows[i], cols[j])]);
    let l_ss = block(keep, keep);
    if eliminate.is_empty() {
        return Ok(SchurReduction { matrix: l_ss, eliminated_condition: 1.0 });
    }
    let l_sg = block(keep, eliminate);
    let l_gg = block(eliminate, eliminate);
    let condition = linalg::symmetric_condition(&l_gg);
    if !(condition < 1.0 / linalg::SINGULAR_RTOL) {
        return Err(Error::Singular { context: "ground block of the inductance matrix", condition });
    }
    let lu = l_gg.lu();
    let x = lu
        .solve(&l_sg.transpose())
        .ok_or(Error::Singular { context: "ground block of the inductance matrix", condition })?;
    let reduced = l_ss - &l_sg * x;
    Ok(SchurReduction { matrix: linalg::symmetrize(&reduced), eliminated_condition: condition })
}

/// Substrate capacitance and conductance matrices `mu0 eps L^-1` and
/// `mu0 sigma L^-1`.
pub fn substrate_cg(l_eff: &RMat, g: &GeometryMaterials) -> Result<(RMat, RMat)> {
    let inv = match Cholesky::new(l_eff.clone()) {
        Some(ch) => ch.inverse(),
        None => linalg::invert_real(l_eff, "effective inductance matrix")?,
    };
    let inv = linalg::symmetrize(&inv);
    Ok((&inv * (MU0 * EPS0 * g.eps_s), &inv * (MU0 * g.sigma_s)))
}

/// Series oxide + depletion capacitance per unit length (F/m) of one TSV.
pub fn oxide_depletion_capacitance(g: &GeometryMaterials, t_dep_um: f64) -> Result<f64> {
    if !(g.r_cond_um > 0.0 && g.t_ins_um > 0.0) {
        return Err(Error::param("t_ins_um", "radius and liner thickness must be positive"));
    }
    if !(t_dep_um >= 0.0) {
        return Err(Error::param("t_dep_um", format!("depletion thickness must be >= 0, got {t_dep_um}")));
    }
    let r = g.r_cond_um;
    let ro = r + g.t_ins_um;
    let rd = ro + t_dep_um;
    let denom = g.eps_s * (ro / r).ln() + g.eps_ins * (rd / ro).ln();
    Ok(2.0 * PI * EPS0 * g.eps_ins * g.eps_s / denom)
}

/// Parallel-wire inter-metal dielectric capacitance (F) between conductors
/// `d_um` apart, over the IMD height.
pub fn imd_capacitance(d_um: f64, g: &GeometryMaterials) -> Result<f64> {
    let ratio = d_um / (2.0 * g.r_cond_um);
    if !(ratio > 1.0) {
        return Err(Error::param("d_ij", format!("conductors overlap: d = {d_um} µm <= 2r")));
    }
    let per_len = PI * EPS0 * g.eps_imd / ratio.acosh();
    Ok(per_len * g.h_imd_um * 1e-6)
}

/// Reference TSV: the lowest-index ground cell.
pub fn default_reference(layout: &TsvLayout) -> Option<usize> {
    layout.roles().iter().position(|&r| r == Role::Ground)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn self_inductance_values() {
        let g = GeometryMaterials::default();
        let l = TsvLayout::build(1, 2, &[1], &[0]).unwrap();
        let p = partial_inductance_matrix(&l, &g, 0).unwrap();
        let want = 2e-7 * (3600.0f64 / 25.0).ln();
        assert!((p.matrix[(0, 0)] - want).abs() < 1e-20);
        assert!((p.matrix[(0, 0)] - 9.94e-7).abs() < 1e-9);

        // d^2 = r_i r_ref  ->  log argument 1.
        let g = GeometryMaterials { p_int_um: 5.0, r_cond_um: 5.0, t_ins_um: 0.1, ..Default::default() };
        let p = partial_inductance_matrix(&l, &g, 0).unwrap();
        assert_eq!(p.matrix[(0, 0)], 0.0);
    }

    #[test]
    fn reference_must_be_occupied() {
        let g = GeometryMaterials::default();
        let l = TsvLayout::build(1, 3, &[1], &[0]).unwrap();
        assert!(partial_inductance_matrix(&l, &g, 2).is_err());
    }

    #[test]
    fn schur_small_cases() {
        let full = RMat::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0]);
        let r = schur_reduce(&full, &[0], &[1]).unwrap();
        assert!((r.matrix[(0, 0)] - 1.5).abs() < 1e-15);

        let block_diag = RMat::from_row_slice(3, 3, &[3.0, 1.0, 0.0, 1.0, 2.0, 0.0, 0.0, 0.0, 5.0]);
        let r = schur_reduce(&block_diag, &[0, 1], &[2]).unwrap();
        assert_eq!(r.matrix, RMat::from_row_slice(2, 2, &[3.0, 1.0, 1.0, 2.0]));

        let singular = RMat::from_row_slice(3, 3, &[2.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0]);
        assert!(matches!(schur_reduce(&singular, &[0], &[1, 2]), Err(Error::Singular { .. })));
    }

    #[test]
    fn oxide_capacitance_limits() {
        let g = GeometryMaterials { eps_ins: 11.9, eps_s: 11.9, ..Default::default() };
        let c = oxide_depletion_capacitance(&g, 0.0).unwrap();
        let want = 2.0 * PI * EPS0 * 11.9 / (5.5f64 / 5.0).ln();
        assert!((c - want).abs() / want < 1e-14);

        let base = GeometryMaterials::default();
        let thin = oxide_depletion_capacitance(&GeometryMaterials { t_ins_um: 0.5, ..base.clone() }, 0.8).unwrap();
        let thick = oxide_depletion_capacitance(&GeometryMaterials { t_ins_um: 3.0, ..base.clone() }, 0.8).unwrap();
        assert!(thick < thin);

        let scaled = GeometryMaterials { r_cond_um: 10.0, t_ins_um: 1.0, ..base.clone() };
        let a = oxide_depletion_capacitance(&base, 0.8).unwrap();
        let b = oxide_depletion_capacitance(&scaled, 1.6).unwrap();
        assert!((a - b).abs() / a < 1e-14);
    }

    #[test]
    fn imd_values() {
        let g = GeometryMaterials::default();
        let c = imd_capacitance(60.0, &g).unwrap();
        let want = PI * EPS0 * 4.0 / 6f64.acosh() * 2e-6;
        assert!((c - want).abs() / want < 1e-14);
        assert!((6f64.acosh() - 2.4779).abs() < 1e-4);
        let mut prev = f64::INFINITY;
        for d in [20.0, 30.0, 40.0, 50.0, 60.0] {
            let c = imd_capacitance(d, &g).unwrap();
            assert!(c < prev);
            prev = c;
        }
        assert!(imd_capacitance(1e12, &g).unwrap() < c / 5.0);
        assert!(imd_capacitance(10.0, &g).is_err());
    }

    #[test]
    fn substrate_identities() {
        let g = GeometryMaterials::default();
        let l = RMat::from_row_slice(1, 1, &[7.5e-7]);
        let (c, gs) = substrate_cg(&l, &g).unwrap();
        assert!((c[(0, 0)] * l[(0, 0)] - MU0 * EPS0 * g.eps_s).abs() < 1e-30);
        assert!((gs[(0, 0)] / c[(0, 0)] - g.sigma_s / (EPS0 * g.eps_s)).abs() < 1e-3);
    }

    fn random_spd(n: usize, vals: &[f64]) -> RMat {
        let a = RMat::from_fn(n, n, |i, j| vals[(i * n + j) % vals.len()]);
        &a * a.transpose() + RMat::identity(n, n) * 0.5
    }

    proptest! {
        /// The reduced matrix is dominated by L_ss in the PSD order.
        #[test]
        fn schur_is_below_leading_block(vals in proptest::collection::vec(-1.0f64..1.0, 25)) {
            let full = random_spd(5, &vals);
            let r = schur_reduce(&full, &[0, 1, 2], &[3, 4]).unwrap();
            let l_ss = RMat::from_fn(3, 3, |i, j| full[(i, j)]);
            let (eig, _) = linalg::symmetric_eigen(&(l_ss - &r.matrix));
            prop_assert!(eig.iter().all(|&e| e > -1e-12));
        }
    }
}
