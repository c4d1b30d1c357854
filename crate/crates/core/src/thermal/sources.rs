//! Volumetric heat sources from the power deficit of S-parameter columns.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::em::sparams::{SParameterBlock, Side};
use crate::em::sweep::PASSIVITY_TOL;
use crate::error::{Error, Result};
use crate::geometry::{GeometryMaterials, UM};
use crate::linalg::CMat;

/// Thermal condition on one face of the block.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "snake_case"))]
pub enum Boundary {
    Adiabatic,
    /// Heat transfer coefficient `h` (W/m²K) to fluid at `t_inf` (K).
    Convection { h: f64, t_inf: f64 },
    /// Held at `t` (K).
    Fixed { t: f64 },
}

impl Boundary {
    fn validate(&self, name: &'static str) -> Result<()> {
        match *self {
            Boundary::Adiabatic => Ok(()),
            Boundary::Convection { h, t_inf } if h > 0.0 && h.is_finite() && t_inf > 0.0 && t_inf.is_finite() => Ok(()),
            Boundary::Fixed { t } if t > 0.0 && t.is_finite() => Ok(()),
            b => Err(Error::param(name, alloc::format!("invalid boundary {b:?}"))),
        }
    }

    pub fn is_adiabatic(&self) -> bool {
        matches!(self, Boundary::Adiabatic)
    }
}

/// Conditions on the six faces; `bottom` is `z = 0`, `top` is `z = h`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FaceBoundaries {
    pub x_min: Boundary,
    pub x_max: Boundary,
    pub y_min: Boundary,
    pub y_max: Boundary,
    pub bottom: Boundary,
    pub top: Boundary,
}

/// Still-air heat transfer coefficient used by [`FaceBoundaries::natural`].
pub const NATURAL_CONVECTION_H: f64 = 10.0;
/// Top-surface coefficient used by [`FaceBoundaries::forced_top`].
pub const FORCED_CONVECTION_H: f64 = 500.0;

impl FaceBoundaries {
    pub fn all(b: Boundary) -> Self {
        FaceBoundaries { x_min: b, x_max: b, y_min: b, y_max: b, bottom: b, top: b }
    }

    /// Natural convection on the top and side faces, adiabatic bottom.
    pub fn natural(t_amb: f64) -> Self {
        FaceBoundaries {
            bottom: Boundary::Adiabatic,
            ..Self::all(Boundary::Convection { h: NATURAL_CONVECTION_H, t_inf: t_amb })
        }
    }

    /// Forced convection on the top face, every other face adiabatic.
    pub fn forced_top(t_amb: f64) -> Self {
        FaceBoundaries {
            top: Boundary::Convection { h: FORCED_CONVECTION_H, t_inf: t_amb },
            ..Self::all(Boundary::Adiabatic)
        }
    }

    pub fn faces(&self) -> [Boundary; 6] {
        [self.x_min, self.x_max, self.y_min, self.y_max, self.bottom, self.top]
    }

    pub fn validate(&self) -> Result<()> {
        let names = ["x_min", "x_max", "y_min", "y_max", "bottom", "top"];
        self.faces().iter().zip(names).try_for_each(|(b, n)| b.validate(n))
    }

    pub fn is_all_adiabatic(&self) -> bool {
        self.faces().iter().all(Boundary::is_adiabatic)
    }
}

/// Ambient temperature plus face conditions.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ThermalEnvironment {
    pub t_amb: f64,
    pub faces: FaceBoundaries,
}

impl ThermalEnvironment {
    pub fn natural(t_amb: f64) -> Self {
        ThermalEnvironment { t_amb, faces: FaceBoundaries::natural(t_amb) }
    }

    pub fn forced_top(t_amb: f64) -> Self {
        ThermalEnvironment { t_amb, faces: FaceBoundaries::forced_top(t_amb) }
    }
}

/// Heat dissipated in one TSV.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct HeatSource {
    /// Grid cell of the TSV.
    pub cell: usize,
    pub power_w: f64,
    /// Power over the conductor volume `π r² h`, W/m³.
    pub density_w_m3: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct HeatSourceField {
    pub sources: Vec<HeatSource>,
    /// Generation spread over the whole block, W/m³.
    pub uniform_w_m3: f64,
    pub env: ThermalEnvironment,
}

impl HeatSourceField {
    pub fn new(sources: Vec<HeatSource>, env: ThermalEnvironment) -> Self {
        HeatSourceField { sources, uniform_w_m3: 0.0, env }
    }

    pub fn uniform(density_w_m3: f64, env: ThermalEnvironment) -> Self {
        HeatSourceField { sources: Vec::new(), uniform_w_m3: density_w_m3, env }
    }

    /// Sum of the per-TSV powers (excluding the uniform term).
    pub fn tsv_power_w(&self) -> f64 {
        self.sources.iter().map(|s| s.power_w).sum()
    }

    /// Sources merged per cell, ascending.
    pub fn per_cell(&self) -> Vec<(usize, f64)> {
        let mut cells: Vec<(usize, f64)> = Vec::new();
        for s in &self.sources {
            match cells.iter_mut().find(|(c, _)| *c == s.cell) {
                Some(e) => e.1 += s.power_w,
                None => cells.push((s.cell, s.power_w)),
            }
        }
        cells.sort_by_key(|e| e.0);
        cells
    }

    pub fn validate(&self) -> Result<()> {
        self.env.faces.validate()?;
        if !(self.env.t_amb > 0.0 && self.env.t_amb.is_finite()) {
            return Err(Error::param("t_amb", alloc::format!("ambient temperature must be > 0 K, got {}", self.env.t_amb)));
        }
        if !(self.uniform_w_m3 >= 0.0 && self.uniform_w_m3.is_finite()) {
            return Err(Error::param("uniform_w_m3", "generation must be finite and >= 0"));
        }
        if self.sources.iter().any(|s| !(s.power_w >= 0.0 && s.power_w.is_finite())) {
            return Err(Error::param("sources", "TSV power must be finite and >= 0"));
        }
        Ok(())
    }
}

/// `1 - sum_i |S_ij|^2` for column `j`, with small negative values from
/// round-off clamped to zero.
pub fn column_deficit(s: &CMat, j: usize) -> Result<f64> {
    if j >= s.ncols() {
        return Err(Error::param("excited", alloc::format!("port {j} out of range for {} ports", s.ncols())));
    }
    let deficit = 1.0 - s.column(j).iter().map(|z| z.norm_sqr()).sum::<f64>();
    if deficit < -PASSIVITY_TOL {
        return Err(Error::PassivityViolation { port: j, deficit: -deficit });
    }
    Ok(deficit.max(0.0))
}

/// One source per excited port: `P_in (1 - sum_i |S_ij|^2)` dissipated in
/// the TSV that owns port `j`.
pub fn heat_sources_from_s(
    s: &SParameterBlock,
    f_hz: f64,
    p_in_w: f64,
    excited: &[usize],
    g: &GeometryMaterials,
    env: ThermalEnvironment,
) -> Result<HeatSourceField> {
    if !(p_in_w >= 0.0 && p_in_w.is_finite()) {
        return Err(Error::param("p_in_w", alloc::format!("input power must be >= 0, got {p_in_w}")));
    }
    let m = s.at(f_hz)?;
    let volume = PI * g.r_cond_m() * g.r_cond_m() * g.h_int_um * UM;
    let sources = excited
        .iter()
        .map(|&j| {
            let deficit = column_deficit(m, j)?;
            let power_w = p_in_w * deficit;
            Ok(HeatSource { cell: s.ports[j].cell, power_w, density_w_m3: power_w / volume })
        })
        .collect::<Result<Vec<_>>>()?;
    let field = HeatSourceField::new(sources, env);
    field.validate()?;
    Ok(field)
}

/// Port index of the top or bottom end of signal `k`.
pub fn signal_port(s: &SParameterBlock, k: usize, side: Side) -> Result<usize> {
    let n = s.signal_count();
    if k >= n {
        return Err(Error::param("excited", alloc::format!("signal {k} out of range for {n} signals")));
    }
    Ok(match side {
        Side::Top => k,
        Side::Bottom => n + k,
    })
}
