use alloc::format;

use crate::error::{Error, Result};
use crate::linalg::{self, CMat};
use crate::rlcg::RlcgModel;
use crate::C64;

/// Series impedance `Z` (Ω/m) and shunt admittance `Y` (S/m) of the reduced
/// multiconductor line at angular frequency `omega`.
///
/// `Z = diag(Z_cond) + jωL` and `Y = D (D + Y_sub)^-1 Y_sub` with
/// `D = jω diag(C_oxdep)` and `Y_sub = G + jωC`: the liner capacitance is in
/// series with the substrate network.
pub fn per_unit_length_matrices(m: &RlcgModel, omega: f64) -> Result<(CMat, CMat)> {
    if !(omega > 0.0) {
        return Err(Error::param("omega", format!("angular frequency must be > 0, got {omega}")));
    }
    let n = m.signal_count();
    let zc = m.z_cond_at(omega)?;
    let j = C64::new(0.0, omega);
    let mut z = m.l_eff.map(|v| j * v);
    for i in 0..n {
        z[(i, i)] += zc;
    }
    let y = series_shunt_admittance(m, omega)?;
    let y = (&y + y.transpose()) * C64::new(0.5, 0.0);
    Ok((z, y))
}

fn series_shunt_admittance(m: &RlcgModel, omega: f64) -> Result<CMat> {
    let n = m.signal_count();
    let j = C64::new(0.0, omega);
    let y_sub = m.g_sub_eff.zip_map(&m.c_sub_eff, |g, c| C64::new(g, omega * c));
    let mut denom = y_sub.clone();
    for i in 0..n {
        denom[(i, i)] += j * m.c_oxdep[i];
    }
    let x = linalg::solve_complex(&denom, &y_sub, "oxide/substrate admittance")?;
    let mut y = x;
    for i in 0..n {
        let d = j * m.c_oxdep[i];
        for k in 0..n {
            y[(i, k)] *= d;
        }
    }
    Ok(y)
}
