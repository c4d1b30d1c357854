//! Steady anisotropic heat conduction on the homogenized block.
//!
//! Vertex-centred finite volumes on a uniform structured grid: every node
//! owns the box reaching halfway to its neighbours, so boundary nodes own
//! half (edge: quarter, corner: eighth) boxes and face conditions act on
//! the node's share of the face. The symmetric system is solved by
//! conjugate gradients preconditioned with exact solves along z lines.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::geometry::UM;

use super::etc::ThermalBlock;
use super::sources::{Boundary, HeatSourceField};

pub const RELATIVE_TOLERANCE: f64 = 1e-8;

/// Nodes along x, y and z.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GridResolution {
    pub nx: usize,
    pub ny: usize,
    pub nz: usize,
}

impl Default for GridResolution {
    fn default() -> Self {
        GridResolution { nx: 41, ny: 41, nz: 21 }
    }
}

impl GridResolution {
    pub fn nodes(&self) -> usize {
        self.nx * self.ny * self.nz
    }

    /// Halves the spacing along every axis.
    pub fn refined(&self) -> Self {
        GridResolution { nx: 2 * self.nx - 1, ny: 2 * self.ny - 1, nz: 2 * self.nz - 1 }
    }

    pub fn validate(&self) -> Result<()> {
        if self.nx < 2 || self.ny < 2 || self.nz < 2 {
            return Err(Error::param("grid", alloc::format!("need at least 2 nodes per axis, got {self:?}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TemperatureField {
    pub grid: GridResolution,
    /// Node spacing (µm) along x, y, z.
    pub spacing_um: [f64; 3],
    /// Node temperatures (K), x fastest then y then z.
    pub values: Vec<f64>,
    pub t_max: f64,
    pub t_min: f64,
    /// Final `|b - A T| / |b|`.
    pub residual: f64,
    pub iterations: usize,
    pub heat_generated_w: f64,
    /// Heat leaving through convective and fixed-temperature faces.
    pub heat_removed_w: f64,
}

impl TemperatureField {
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        (k * self.grid.ny + j) * self.grid.nx + i
    }

    pub fn at(&self, i: usize, j: usize, k: usize) -> f64 {
        self.values[self.index(i, j, k)]
    }

    /// Node coordinates in µm.
    pub fn position_um(&self, i: usize, j: usize, k: usize) -> (f64, f64, f64) {
        (i as f64 * self.spacing_um[0], j as f64 * self.spacing_um[1], k as f64 * self.spacing_um[2])
    }

    /// Relative mismatch between generated and removed heat.
    pub fn energy_balance_error(&self) -> f64 {
        if self.heat_generated_w == 0.0 {
            return self.heat_removed_w.abs();
        }
        (self.heat_generated_w - self.heat_removed_w).abs() / self.heat_generated_w
    }

    /// `(i, j, k)` of the hottest node.
    pub fn hottest_node(&self) -> (usize, usize, usize) {
        let n = self.values.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).map_or(0, |(n, _)| n);
        (n % self.grid.nx, (n / self.grid.nx) % self.grid.ny, n / (self.grid.nx * self.grid.ny))
    }
}

/// Length of the node's box along an axis of `n` nodes spaced `d`.
fn box_width(idx: usize, n: usize, d: f64) -> f64 {
    if idx == 0 || idx == n - 1 {
        0.5 * d
    } else {
        d
    }
}

/// Overlap of `[a0, a1]` and `[b0, b1]`.
fn overlap(a0: f64, a1: f64, b0: f64, b1: f64) -> f64 {
    (a1.min(b1) - a0.max(b0)).max(0.0)
}

struct System {
    grid: GridResolution,
    diag: Vec<f64>,
    /// Conductance to the +x, +y, +z neighbour (W/K).
    gx: Vec<f64>,
    gy: Vec<f64>,
    gz: Vec<f64>,
    rhs: Vec<f64>,
    fixed: Vec<Option<f64>>,
    /// `(node, h A, t_inf)` for every convective face share.
    convective: Vec<(usize, f64, f64)>,
    power: Vec<f64>,
}

impl System {
    fn idx(&self, i: usize, j: usize, k: usize) -> usize {
        (k * self.grid.ny + j) * self.grid.nx + i
    }

    /// `A x` with fixed nodes decoupled (identity rows).
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let GridResolution { nx, ny, nz } = self.grid;
        for k in 0..nz {
            for j in 0..ny {
                for i in 0..nx {
                    let n = self.idx(i, j, k);
                    if self.fixed[n].is_some() {
                        y[n] = x[n];
                        continue;
                    }
                    let mut v = self.diag[n] * x[n];
                    let mut couple = |m: usize, g: f64| {
                        if self.fixed[m].is_none() {
                            v -= g * x[m];
                        }
                    };
                    if i > 0 {
                        couple(n - 1, self.gx[n - 1]);
                    }
                    if i + 1 < nx {
                        couple(n + 1, self.gx[n]);
                    }
                    if j > 0 {
                        couple(n - nx, self.gy[n - nx]);
                    }
                    if j + 1 < ny {
                        couple(n + nx, self.gy[n]);
                    }
                    if k > 0 {
                        couple(n - nx * ny, self.gz[n - nx * ny]);
                    }
                    if k + 1 < nz {
                        couple(n + nx * ny, self.gz[n]);
                    }
                    y[n] = v;
                }
            }
        }
    }
}

fn assemble(block: &ThermalBlock, src: &HeatSourceField, grid: GridResolution) -> Result<System> {
    let GridResolution { nx, ny, nz } = grid;
    let (lx, ly, lz) = (block.l_s_um * UM, block.w_s_um * UM, block.h_um * UM);
    let (dx, dy, dz) = (lx / (nx - 1) as f64, ly / (ny - 1) as f64, lz / (nz - 1) as f64);
    let n = grid.nodes();
    let mut sys = System {
        grid,
        diag: vec![0.0; n],
        gx: vec![0.0; n],
        gy: vec![0.0; n],
        gz: vec![0.0; n],
        rhs: vec![0.0; n],
        fixed: vec![None; n],
        convective: Vec::new(),
        power: vec![0.0; n],
    };
    let wx: Vec<f64> = (0..nx).map(|i| box_width(i, nx, dx)).collect();
    let wy: Vec<f64> = (0..ny).map(|j| box_width(j, ny, dy)).collect();
    let wz: Vec<f64> = (0..nz).map(|k| box_width(k, nz, dz)).collect();

    for k in 0..nz {
        for j in 0..ny {
            for i in 0..nx {
                let m = sys.idx(i, j, k);
                if i + 1 < nx {
                    let g = block.k_x * wy[j] * wz[k] / dx;
                    sys.gx[m] = g;
                    sys.diag[m] += g;
                    sys.diag[m + 1] += g;
                }
                if j + 1 < ny {
                    let g = block.k_y * wx[i] * wz[k] / dy;
                    sys.gy[m] = g;
                    sys.diag[m] += g;
                    sys.diag[m + nx] += g;
                }
                if k + 1 < nz {
                    let g = block.k_z * wx[i] * wy[j] / dz;
                    sys.gz[m] = g;
                    sys.diag[m] += g;
                    sys.diag[m + nx * ny] += g;
                }
            }
        }
    }

    // face conditions on each boundary node's share of the face
    let faces = &src.env.faces;
    let stamp = |sys: &mut System, m: usize, b: Boundary, area: f64| match b {
        Boundary::Adiabatic => {}
        Boundary::Convection { h, t_inf } => {
            sys.diag[m] += h * area;
            sys.rhs[m] += h * area * t_inf;
            sys.convective.push((m, h * area, t_inf));
        }
        Boundary::Fixed { t } => {
            if sys.fixed[m].is_none() {
                sys.fixed[m] = Some(t);
            }
        }
    };
    for k in 0..nz {
        for j in 0..ny {
            let a = wy[j] * wz[k];
            let m0 = sys.idx(0, j, k);
            stamp(&mut sys, m0, faces.x_min, a);
            let m1 = sys.idx(nx - 1, j, k);
            stamp(&mut sys, m1, faces.x_max, a);
        }
        for i in 0..nx {
            let a = wx[i] * wz[k];
            let m0 = sys.idx(i, 0, k);
            stamp(&mut sys, m0, faces.y_min, a);
            let m1 = sys.idx(i, ny - 1, k);
            stamp(&mut sys, m1, faces.y_max, a);
        }
    }
    for j in 0..ny {
        for i in 0..nx {
            let a = wx[i] * wy[j];
            let m0 = sys.idx(i, j, 0);
            stamp(&mut sys, m0, faces.bottom, a);
            let m1 = sys.idx(i, j, nz - 1);
            stamp(&mut sys, m1, faces.top, a);
        }
    }

    // generation: uniform part plus each TSV's power spread over its
    // footprint column by box overlap
    if src.uniform_w_m3 > 0.0 {
        for k in 0..nz {
            for j in 0..ny {
                for i in 0..nx {
                    let m = sys.idx(i, j, k);
                    sys.power[m] += src.uniform_w_m3 * wx[i] * wy[j] * wz[k];
                }
            }
        }
    }
    let side = block.footprint_um * UM;
    let box_lo = |idx: usize, d: f64| if idx == 0 { 0.0 } else { (idx as f64 - 0.5) * d };
    for (cell, p) in src.per_cell() {
        if p == 0.0 {
            continue;
        }
        if cell >= block.rows * block.cols || !(side > 0.0) {
            return Err(Error::param("sources", alloc::format!("cell {cell} has no TSV footprint in the thermal block")));
        }
        let (cx, cy) = block.cell_center_um(cell);
        let (x0, x1) = (cx * UM - 0.5 * side, cx * UM + 0.5 * side);
        let (y0, y1) = (cy * UM - 0.5 * side, cy * UM + 0.5 * side);
        let density = p / (side * side * lz);
        for j in 0..ny {
            let oy = overlap(box_lo(j, dy), box_lo(j, dy) + wy[j], y0, y1);
            if oy == 0.0 {
                continue;
            }
            for i in 0..nx {
                let ox = overlap(box_lo(i, dx), box_lo(i, dx) + wx[i], x0, x1);
                if ox == 0.0 {
                    continue;
                }
                for k in 0..nz {
                    let m = sys.idx(i, j, k);
                    sys.power[m] += density * ox * oy * wz[k];
                }
            }
        }
    }
    for m in 0..n {
        sys.rhs[m] += sys.power[m];
    }
    Ok(sys)
}

/// Thomas factors for every z line; fixed nodes become decoupled rows.
struct LinePreconditioner {
    /// Modified super-diagonal and inverse pivots, per node.
    upper: Vec<f64>,
    inv_pivot: Vec<f64>,
    lower: Vec<f64>,
}

impl LinePreconditioner {
    fn new(sys: &System) -> Self {
        let GridResolution { nx, ny, nz } = sys.grid;
        let plane = nx * ny;
        let n = sys.grid.nodes();
        let mut upper = vec![0.0; n];
        let mut inv_pivot = vec![0.0; n];
        let mut lower = vec![0.0; n];
        for col in 0..plane {
            let mut prev_upper = 0.0;
            for k in 0..nz {
                let m = col + k * plane;
                let free = sys.fixed[m].is_none();
                let coupled = |other: usize| free && sys.fixed[other].is_none();
                let a = if k > 0 && coupled(m - plane) { -sys.gz[m - plane] } else { 0.0 };
                let c = if k + 1 < nz && coupled(m + plane) { -sys.gz[m] } else { 0.0 };
                let b = if free { sys.diag[m] } else { 1.0 };
                let pivot = b - a * prev_upper;
                inv_pivot[m] = 1.0 / pivot;
                upper[m] = c / pivot;
                lower[m] = a;
                prev_upper = upper[m];
            }
        }
        LinePreconditioner { upper, inv_pivot, lower }
    }

    fn apply(&self, grid: GridResolution, r: &[f64], z: &mut [f64]) {
        let plane = grid.nx * grid.ny;
        for col in 0..plane {
            let mut prev = 0.0;
            for k in 0..grid.nz {
                let m = col + k * plane;
                prev = (r[m] - self.lower[m] * prev) * self.inv_pivot[m];
                z[m] = prev;
            }
            for k in (0..grid.nz - 1).rev() {
                let m = col + k * plane;
                z[m] -= self.upper[m] * z[m + plane];
            }
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn solve_steady_state(block: &ThermalBlock, src: &HeatSourceField, grid: GridResolution) -> Result<TemperatureField> {
    solve_steady_state_with_cap(block, src, grid, 20 * grid.nodes().max(1000))
}

/// As [`solve_steady_state`] with an explicit iteration cap.
pub fn solve_steady_state_with_cap(
    block: &ThermalBlock,
    src: &HeatSourceField,
    grid: GridResolution,
    max_iterations: usize,
) -> Result<TemperatureField> {
    grid.validate()?;
    src.validate()?;
    for (name, k) in [("k_x", block.k_x), ("k_y", block.k_y), ("k_z", block.k_z)] {
        if !(k > 0.0 && k.is_finite()) {
            return Err(Error::param(name, alloc::format!("conductivity must be > 0, got {k}")));
        }
    }
    for (name, v) in [("l_s_um", block.l_s_um), ("w_s_um", block.w_s_um), ("h_um", block.h_um)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::param(name, alloc::format!("block dimension must be > 0, got {v}")));
        }
    }
    let sys = assemble(block, src, grid)?;
    let generated: f64 = sys.power.iter().sum();
    if src.env.faces.is_all_adiabatic() {
        if generated > 0.0 {
            return Err(Error::SingularThermal("every face is adiabatic but heat is generated"));
        }
        return Err(Error::SingularThermal("every face is adiabatic; temperature is undetermined"));
    }

    let n = grid.nodes();
    let t0 = src.env.t_amb;
    let mut t: Vec<f64> = sys.fixed.iter().map(|f| f.unwrap_or(t0)).collect();

    // free-node right-hand side with fixed neighbours moved across
    let mut b = sys.rhs.clone();
    {
        let GridResolution { nx, ny, nz } = grid;
        for k in 0..nz {
            for j in 0..ny {
                for i in 0..nx {
                    let m = sys.idx(i, j, k);
                    if sys.fixed[m].is_some() {
                        b[m] = t[m];
                        continue;
                    }
                    let mut add = |o: usize, g: f64| {
                        if let Some(tf) = sys.fixed[o] {
                            b[m] += g * tf;
                        }
                    };
                    if i > 0 {
                        add(m - 1, sys.gx[m - 1]);
                    }
                    if i + 1 < nx {
                        add(m + 1, sys.gx[m]);
                    }
                    if j > 0 {
                        add(m - nx, sys.gy[m - nx]);
                    }
                    if j + 1 < ny {
                        add(m + nx, sys.gy[m]);
                    }
                    if k > 0 {
                        add(m - nx * ny, sys.gz[m - nx * ny]);
                    }
                    if k + 1 < nz {
                        add(m + nx * ny, sys.gz[m]);
                    }
                }
            }
        }
    }
    let b_norm = dot(&b, &b).sqrt();
    let pre = LinePreconditioner::new(&sys);
    let mut r = vec![0.0; n];
    sys.apply(&t, &mut r);
    for m in 0..n {
        r[m] = b[m] - r[m];
    }
    let mut z = vec![0.0; n];
    pre.apply(grid, &r, &mut z);
    let mut p = z.clone();
    let mut ap = vec![0.0; n];
    let mut rz = dot(&r, &z);
    let mut residual = if b_norm > 0.0 { dot(&r, &r).sqrt() / b_norm } else { 0.0 };
    let mut iterations = 0;
    while residual >= RELATIVE_TOLERANCE {
        if iterations >= max_iterations {
            return Err(Error::NotConverged { what: "thermal conjugate gradients", iterations, residual });
        }
        sys.apply(&p, &mut ap);
        let alpha = rz / dot(&p, &ap);
        for m in 0..n {
            t[m] += alpha * p[m];
            r[m] -= alpha * ap[m];
        }
        pre.apply(grid, &r, &mut z);
        let rz_next = dot(&r, &z);
        let beta = rz_next / rz;
        rz = rz_next;
        for m in 0..n {
            p[m] = z[m] + beta * p[m];
        }
        iterations += 1;
        residual = dot(&r, &r).sqrt() / b_norm;
    }

    let removed = heat_removed(&sys, &t);
    let (t_min, t_max) = t.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    Ok(TemperatureField {
        grid,
        spacing_um: [
            block.l_s_um / (grid.nx - 1) as f64,
            block.w_s_um / (grid.ny - 1) as f64,
            block.h_um / (grid.nz - 1) as f64,
        ],
        values: t,
        t_max,
        t_min,
        residual,
        iterations,
        heat_generated_w: generated,
        heat_removed_w: removed,
    })
}

/// Convective outflow plus whatever the fixed nodes absorb.
fn heat_removed(sys: &System, t: &[f64]) -> f64 {
    let mut out: f64 = sys.convective.iter().map(|&(m, ha, tinf)| ha * (t[m] - tinf)).sum();
    let GridResolution { nx, ny, nz } = sys.grid;
    for k in 0..nz {
        for j in 0..ny {
            for i in 0..nx {
                let m = sys.idx(i, j, k);
                if sys.fixed[m].is_none() {
                    continue;
                }
                let mut inflow = sys.power[m];
                let mut from = |o: usize, g: f64| inflow += g * (t[o] - t[m]);
                if i > 0 {
                    from(m - 1, sys.gx[m - 1]);
                }
                if i + 1 < nx {
                    from(m + 1, sys.gx[m]);
                }
                if j > 0 {
                    from(m - nx, sys.gy[m - nx]);
                }
                if j + 1 < ny {
                    from(m + nx, sys.gy[m]);
                }
                if k > 0 {
                    from(m - nx * ny, sys.gz[m - nx * ny]);
                }
                if k + 1 < nz {
                    from(m + nx * ny, sys.gz[m]);
                }
                // convective share already counted at this node
                let conv: f64 = sys.convective.iter().filter(|c| c.0 == m).map(|&(_, ha, tinf)| ha * (t[m] - tinf)).sum();
                out += inflow - conv;
            }
        }
    }
    out
}
