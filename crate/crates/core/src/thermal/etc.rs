//! Effective thermal conductivities and heat capacity of a TSV unit cell and
//! of a whole (possibly sparse) array embedded in a substrate block.

use core::f64::consts::{FRAC_PI_2, PI};

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::geometry::GeometryMaterials;
use crate::layout::TsvLayout;

/// Panels used by the lateral quadrature.
pub const LATERAL_PANELS: usize = 1000;
const LATERAL_RTOL: f64 = 1e-6;

/// Cross-section areas (µm²) of via metal, liner and substrate in the square
/// unit cell of side `2(r + t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct UnitCellAreas {
    pub via: f64,
    pub liner: f64,
    pub substrate: f64,
}

impl UnitCellAreas {
    pub fn total(&self) -> f64 {
        self.via + self.liner + self.substrate
    }

    fn weighted(&self, via: f64, liner: f64, substrate: f64) -> f64 {
        (via * self.via + liner * self.liner + substrate * self.substrate) / self.total()
    }
}

pub fn unit_cell_areas(g: &GeometryMaterials) -> UnitCellAreas {
    let r = g.r_cond_um;
    let ro = g.outer_radius_um();
    UnitCellAreas { via: PI * r * r, liner: PI * (ro * ro - r * r), substrate: ro * ro * (4.0 - PI) }
}

/// Area-weighted (parallel) conductivity of the unit cell along the via axis.
pub fn vertical_unit_etc(g: &GeometryMaterials) -> f64 {
    unit_cell_areas(g).weighted(g.k_via, g.k_liner, g.k_sub)
}

/// Area-weighted volumetric heat capacity of the unit cell, J/(m³K).
pub fn volumetric_heat_capacity(g: &GeometryMaterials) -> f64 {
    unit_cell_areas(g).weighted(g.rho_via * g.cp_via, g.rho_liner * g.cp_liner, g.rho_sub * g.cp_sub)
}

fn chord(radius: f64, x: f64) -> f64 {
    2.0 * (radius * radius - x * x).max(0.0).sqrt()
}

/// Material widths `(W_v, W_l, W_s)` of the unit cell along the line at
/// lateral offset `x` from the via axis.
pub fn chord_widths(g: &GeometryMaterials, x: f64) -> (f64, f64, f64) {
    let ro = g.outer_radius_um();
    let wv = chord(g.r_cond_um, x);
    let wl = chord(ro, x) - wv;
    (wv, wl, 2.0 * ro - wv - wl)
}

fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let n = panels + panels % 2;
    let h = (b - a) / n as f64;
    let mut sum = f(a) + f(b);
    for i in 1..n {
        sum += if i % 2 == 1 { 4.0 } else { 2.0 } * f(a + i as f64 * h);
    }
    sum * h / 3.0
}

/// Lateral quadrature with `panels` Simpson panels per sub-interval. The two
/// sub-intervals `[0, r]` and `[r, r + t]` are mapped through `x = R sin θ`
/// so the square-root edges of the chords become smooth.
pub fn lateral_unit_etc_with_panels(g: &GeometryMaterials, panels: usize) -> f64 {
    let (r, ro) = (g.r_cond_um, g.outer_radius_um());
    let cell = 2.0 * ro;
    let integrand = |x: f64| {
        let (wv, wl, ws) = chord_widths(g, x);
        1.0 / ((wv / g.k_via) / cell + (wl / g.k_liner) / cell + (ws / g.k_sub) / cell)
    };
    let inner = simpson(|th| integrand(r * th.sin()) * r * th.cos(), 0.0, FRAC_PI_2, panels);
    let start = (r / ro).asin();
    let outer = simpson(|th| integrand(ro * th.sin()) * ro * th.cos(), start, FRAC_PI_2, panels);
    (inner + outer) / ro
}

/// Conductivity across the unit cell: width-fraction series resistance per
/// strip, integrated over the half cell and divided by its width.
pub fn lateral_unit_etc(g: &GeometryMaterials) -> Result<f64> {
    let fine = lateral_unit_etc_with_panels(g, LATERAL_PANELS);
    let coarse = lateral_unit_etc_with_panels(g, LATERAL_PANELS / 2);
    let estimate = (fine - coarse).abs() / 15.0;
    if !(estimate <= LATERAL_RTOL * fine.abs()) {
        return Err(Error::NotConverged { what: "lateral ETC quadrature", iterations: LATERAL_PANELS, residual: estimate });
    }
    Ok(fine)
}

/// Homogenized substrate block holding a TSV array centred in it.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ThermalBlock {
    pub k_x: f64,
    pub k_y: f64,
    pub k_z: f64,
    /// Volumetric heat capacity of the block, J/(m³K).
    pub rho_cp: f64,
    pub l_s_um: f64,
    pub w_s_um: f64,
    pub h_um: f64,
    pub f_occ: f64,
    pub n_tsv: usize,
    pub rows: usize,
    pub cols: usize,
    pub pitch_um: f64,
    /// Side of the effective TSV footprint used for heat deposition (µm).
    pub footprint_um: f64,
}

impl ThermalBlock {
    /// Plain substrate block without TSVs.
    pub fn substrate(g: &GeometryMaterials) -> Self {
        ThermalBlock {
            k_x: g.k_sub,
            k_y: g.k_sub,
            k_z: g.k_sub,
            rho_cp: g.rho_sub * g.cp_sub,
            l_s_um: g.l_s_um,
            w_s_um: g.w_s_um,
            h_um: g.h_int_um,
            f_occ: 0.0,
            n_tsv: 0,
            rows: 0,
            cols: 0,
            pitch_um: g.p_int_um,
            footprint_um: 0.0,
        }
    }

    /// Centre of grid cell `index` in block coordinates (µm), the array
    /// being centred in the substrate.
    pub fn cell_center_um(&self, index: usize) -> (f64, f64) {
        let (row, col) = (index / self.cols.max(1), index % self.cols.max(1));
        let x0 = 0.5 * (self.l_s_um - self.cols as f64 * self.pitch_um);
        let y0 = 0.5 * (self.w_s_um - self.rows as f64 * self.pitch_um);
        (x0 + (col as f64 + 0.5) * self.pitch_um, y0 + (row as f64 + 0.5) * self.pitch_um)
    }
}

/// Lateral conductivity along one axis: `lanes` rows of `cells` TSV
/// footprints of side `side` run along the heat flow, each lane being a
/// series path of footprints and substrate, in parallel with the
/// TSV-free remainder of the cross-section.
pub fn lateral_array_etc(
    k_sub: f64,
    k_cell: f64,
    lanes: usize,
    cells: usize,
    side: f64,
    length: f64,
    width: f64,
) -> f64 {
    let phi = lanes as f64 * side / width;
    if phi == 0.0 {
        return k_sub;
    }
    let along = cells as f64 * side / length;
    let lane = 1.0 / (along / k_cell + (1.0 - along) / k_sub);
    (1.0 - phi) * k_sub + phi * lane
}

/// Parallel mixing of `n_tsv` unit cells of side `cell` into the block
/// cross-section.
pub fn vertical_array_etc(k_sub: f64, k_cell: f64, n_tsv: usize, cell: f64, l_s: f64, w_s: f64) -> f64 {
    k_sub + cell * cell / (l_s * w_s) * n_tsv as f64 * (k_cell - k_sub)
}

/// Array-level conductivities with the lateral footprint side given
/// explicitly; [`array_etc`] passes the sparsity-scaled side.
pub fn array_etc_with_footprint(layout: &TsvLayout, g: &GeometryMaterials, side_um: f64) -> Result<ThermalBlock> {
    g.validate()?;
    let (rows, cols) = (layout.rows(), layout.cols());
    let span_x = cols as f64 * g.p_int_um;
    let span_y = rows as f64 * g.p_int_um;
    if span_x > g.l_s_um || span_y > g.w_s_um {
        return Err(Error::param(
            "l_s_um",
            alloc::format!("{rows}x{cols} array spans {span_x} x {span_y} µm, larger than the {} x {} µm substrate", g.l_s_um, g.w_s_um),
        ));
    }
    let n_tsv = layout.n_tsv();
    let f_occ = layout.occupancy();
    let cell = 2.0 * g.outer_radius_um();
    let k_lat = lateral_unit_etc(g)?;
    let k_vert = vertical_unit_etc(g);
    let rho_cp_sub = g.rho_sub * g.cp_sub;
    Ok(ThermalBlock {
        k_x: lateral_array_etc(g.k_sub, k_lat, rows, cols, side_um, g.l_s_um, g.w_s_um),
        k_y: lateral_array_etc(g.k_sub, k_lat, cols, rows, side_um, g.w_s_um, g.l_s_um),
        k_z: vertical_array_etc(g.k_sub, k_vert, n_tsv, cell, g.l_s_um, g.w_s_um),
        rho_cp: vertical_array_etc(rho_cp_sub, volumetric_heat_capacity(g), n_tsv, cell, g.l_s_um, g.w_s_um),
        l_s_um: g.l_s_um,
        w_s_um: g.w_s_um,
        h_um: g.h_int_um,
        f_occ,
        n_tsv,
        rows,
        cols,
        pitch_um: g.p_int_um,
        footprint_um: side_um,
    })
}

/// Effective footprint side `2(r + t) sqrt(f_occ)`.
pub fn effective_footprint_um(layout: &TsvLayout, g: &GeometryMaterials) -> f64 {
    2.0 * g.outer_radius_um() * layout.occupancy().sqrt()
}

pub fn array_etc(layout: &TsvLayout, g: &GeometryMaterials) -> Result<ThermalBlock> {
    array_etc_with_footprint(layout, g, effective_footprint_um(layout, g))
}
