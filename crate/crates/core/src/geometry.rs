//! Technology, geometry and material constants.
//!
//! Lengths are stored in micrometres (the unit designers quote); helpers
//! return SI metres where formulas need them.

use alloc::format;

use crate::error::{Error, Result};

pub const EPS0: f64 = 8.854_187_812_8e-12;
pub const MU0: f64 = 4.0e-7 * core::f64::consts::PI;
pub const BOLTZMANN: f64 = 1.380_649e-23;
pub const ELECTRON_CHARGE: f64 = 1.602_176_634e-19;

/// Copper resistivity model `rho0 * (1 + alpha (T - T0))`.
pub const CU_RHO0: f64 = 1.7e-8;
pub const CU_ALPHA: f64 = 3.9e-3;
pub const CU_T0: f64 = 300.0;

pub const UM: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize), serde(default))]
pub struct GeometryMaterials {
    /// Conductor radius (µm).
    pub r_cond_um: f64,
    /// Pitch between adjacent grid positions (µm).
    pub p_int_um: f64,
    /// TSV height (µm).
    pub h_int_um: f64,
    /// Oxide liner thickness (µm).
    pub t_ins_um: f64,
    /// Inter-metal dielectric height (µm).
    pub h_imd_um: f64,
    /// Substrate extent along x (columns), µm.
    pub l_s_um: f64,
    /// Substrate extent along y (rows), µm.
    pub w_s_um: f64,

    /// Substrate conductivity (S/m).
    pub sigma_s: f64,
    /// Conductor conductivity (S/m).
    pub sigma_cu: f64,
    pub eps_s: f64,
    pub eps_ins: f64,
    pub eps_imd: f64,
    pub mu_r_cond: f64,
    /// Substrate acceptor doping (cm^-3).
    pub n_a_cm3: f64,
    /// Intrinsic carrier concentration (cm^-3).
    pub n_i_cm3: f64,
    /// Temperature used by the depletion model (K).
    pub temperature_k: f64,
    pub boltzmann: f64,
    pub charge: f64,

    /// Thermal conductivities of via metal, liner and substrate (W/mK).
    pub k_via: f64,
    pub k_liner: f64,
    pub k_sub: f64,
    /// Mass densities (kg/m^3).
    pub rho_via: f64,
    pub rho_liner: f64,
    pub rho_sub: f64,
    /// Specific heats (J/kgK).
    pub cp_via: f64,
    pub cp_liner: f64,
    pub cp_sub: f64,
}

impl Default for GeometryMaterials {
    /// Fixed-geometry benchmark values (5 µm radius, 60 µm pitch, 100 µm
    /// height, 0.5 µm oxide, Cu 5.8e7 S/m, Si 10 S/m, oxide εr 4) with
    /// standard silicon / SiO2 / Cu constants for everything else.
    fn default() -> Self {
        GeometryMaterials {
            r_cond_um: 5.0,
            p_int_um: 60.0,
            h_int_um: 100.0,
            t_ins_um: 0.5,
            h_imd_um: 2.0,
            l_s_um: 1000.0,
            w_s_um: 1000.0,
            sigma_s: 10.0,
            sigma_cu: 5.8e7,
            eps_s: 11.9,
            eps_ins: 4.0,
            eps_imd: 4.0,
            mu_r_cond: 1.0,
            n_a_cm3: 1e15,
            n_i_cm3: 1.45e10,
            temperature_k: 300.0,
            boltzmann: BOLTZMANN,
            charge: ELECTRON_CHARGE,
            k_via: 400.0,
            k_liner: 1.4,
            k_sub: 150.0,
            rho_via: 8960.0,
            rho_liner: 2200.0,
            rho_sub: 2329.0,
            cp_via: 385.0,
            cp_liner: 730.0,
            cp_sub: 700.0,
        }
    }
}

fn positive(name: &'static str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::param(name, format!("must be finite and > 0, got {v}")))
    }
}

impl GeometryMaterials {
    /// Radius of the oxide shell, `r_cond + t_ins` (µm).
    pub fn outer_radius_um(&self) -> f64 {
        self.r_cond_um + self.t_ins_um
    }

    pub fn r_cond_m(&self) -> f64 {
        self.r_cond_um * UM
    }

    pub fn h_int_m(&self) -> f64 {
        self.h_int_um * UM
    }

    pub fn validate(&self) -> Result<()> {
        positive("r_cond_um", self.r_cond_um)?;
        positive("p_int_um", self.p_int_um)?;
        positive("h_int_um", self.h_int_um)?;
        positive("t_ins_um", self.t_ins_um)?;
        positive("h_imd_um", self.h_imd_um)?;
        positive("l_s_um", self.l_s_um)?;
        positive("w_s_um", self.w_s_um)?;
        positive("sigma_s", self.sigma_s)?;
        positive("sigma_cu", self.sigma_cu)?;
        positive("eps_s", self.eps_s)?;
        positive("eps_ins", self.eps_ins)?;
        positive("eps_imd", self.eps_imd)?;
        positive("mu_r_cond", self.mu_r_cond)?;
        positive("n_i_cm3", self.n_i_cm3)?;
        positive("temperature_k", self.temperature_k)?;
        positive("boltzmann", self.boltzmann)?;
        positive("charge", self.charge)?;
        positive("k_via", self.k_via)?;
        positive("k_liner", self.k_liner)?;
        positive("k_sub", self.k_sub)?;
        positive("rho_via", self.rho_via)?;
        positive("rho_liner", self.rho_liner)?;
        positive("rho_sub", self.rho_sub)?;
        positive("cp_via", self.cp_via)?;
        positive("cp_liner", self.cp_liner)?;
        positive("cp_sub", self.cp_sub)?;
        if !(self.n_a_cm3 > self.n_i_cm3) {
            return Err(Error::param(
                "n_a_cm3",
                format!("doping {} must exceed intrinsic concentration {}", self.n_a_cm3, self.n_i_cm3),
            ));
        }
        let clearance = self.p_int_um / 2.0 - self.r_cond_um;
        if !(self.t_ins_um < clearance) {
            return Err(Error::param(
                "t_ins_um",
                format!(
                    "liner {} µm overlaps neighbours: must be < p/2 - r = {} µm",
                    self.t_ins_um, clearance
                ),
            ));
        }
        Ok(())
    }
}

/// Copper resistivity (Ω·m) at temperature `t_k`.
pub fn copper_resistivity(t_k: f64) -> f64 {
    CU_RHO0 * (1.0 + CU_ALPHA * (t_k - CU_T0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        GeometryMaterials::default().validate().unwrap();
    }

    #[test]
    fn liner_overlap_rejected() {
        let g = GeometryMaterials { p_int_um: 20.0, r_cond_um: 6.0, t_ins_um: 4.0, ..Default::default() };
        assert!(matches!(g.validate(), Err(Error::InvalidParameter { name: "t_ins_um", .. })));
    }

    #[test]
    fn doping_must_exceed_intrinsic() {
        let g = GeometryMaterials { n_a_cm3: 1e9, ..Default::default() };
        assert!(g.validate().is_err());
    }

    #[test]
    fn resistivity_values() {
        assert_eq!(copper_resistivity(300.0), 1.7e-8);
        assert!((copper_resistivity(400.0) - 2.363e-8).abs() < 1e-20);
        let step1 = copper_resistivity(310.0) - copper_resistivity(300.0);
        let step2 = copper_resistivity(320.0) - copper_resistivity(310.0);
        assert!((step1 - step2).abs() < 1e-22);
    }
}
