//! Modified Bessel functions `I0`, `I1` of complex argument and the
//! skin-effect internal impedance of a round conductor.
//!
//! Power series below `|z| = SERIES_LIMIT`, Hankel asymptotic expansion
//! above. On the `arg z = pi/4` ray the asymptotic form drops a term of
//! relative size `exp(-2 Re z)`, so the crossover must stay above ~17 for
//! 1e-10 accuracy.

use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::geometry::{GeometryMaterials, MU0};
use crate::C64;

pub const SERIES_LIMIT: f64 = 25.0;

/// `I_nu(z)` for `nu` in {0, 1} by the ascending series.
fn series(nu: u32, z: C64) -> C64 {
    let q = z * z * 0.25;
    let mut term = if nu == 0 { C64::new(1.0, 0.0) } else { z * 0.5 };
    let mut sum = term;
    for k in 1..500u32 {
        term = term * q / ((k * (k + nu)) as f64);
        sum += term;
        if term.norm() <= 1e-18 * sum.norm() {
            break;
        }
    }
    sum
}

/// Asymptotic sum `sum_k (-1)^k a_k(nu) / z^k` with optimal truncation.
fn hankel_sum(nu: u32, z: C64) -> C64 {
    let mu = 4.0 * (nu * nu) as f64;
    let mut term = C64::new(1.0, 0.0);
    let mut sum = term;
    let mut last = f64::INFINITY;
    for k in 1..200u32 {
        let odd = (2 * k - 1) as f64;
        let next = -term * (mu - odd * odd) / (8.0 * k as f64) / z;
        let mag = next.norm();
        if mag >= last {
            break;
        }
        term = next;
        sum += term;
        last = mag;
        if mag <= 1e-18 * sum.norm() {
            break;
        }
    }
    sum
}

/// `I_nu(z)`, `nu` in {0, 1}. The asymptotic branch assumes `Re z > 0`.
pub fn bessel_i(nu: u32, z: C64) -> C64 {
    assert!(nu <= 1, "only orders 0 and 1 are implemented");
    if z.norm() < SERIES_LIMIT || z.re <= 0.0 {
        series(nu, z)
    } else {
        z.exp() / (z * 2.0 * PI).sqrt() * hankel_sum(nu, z)
    }
}

/// `z I0(z) / I1(z)`, finite at `z = 0` where it tends to 2.
pub fn z_i0_over_i1(z: C64) -> C64 {
    if z.norm() < SERIES_LIMIT || z.re <= 0.0 {
        // I1(z)/z by its own series keeps the small-z limit exact.
        let q = z * z * 0.25;
        let mut t0 = C64::new(1.0, 0.0);
        let mut t1 = C64::new(0.5, 0.0);
        let (mut s0, mut s1) = (t0, t1);
        for k in 1..500u32 {
            t0 = t0 * q / ((k * k) as f64);
            t1 = t1 * q / ((k * (k + 1)) as f64);
            s0 += t0;
            s1 += t1;
            if t0.norm() <= 1e-18 * s0.norm() && t1.norm() <= 1e-18 * s1.norm() {
                break;
            }
        }
        s0 / s1
    } else {
        z * hankel_sum(0, z) / hankel_sum(1, z)
    }
}

/// Internal impedance per unit length (Ω/m) of a round conductor at angular
/// frequency `omega`, given radius (m), conductivity (S/m) and relative
/// permeability.
pub fn internal_impedance(omega: f64, radius_m: f64, sigma: f64, mu_r: f64) -> Result<C64> {
    if !(omega >= 0.0) {
        return Err(Error::param("omega", alloc::format!("angular frequency must be >= 0, got {omega}")));
    }
    let dc = 1.0 / (sigma * PI * radius_m * radius_m);
    if omega == 0.0 {
        return Ok(C64::new(dc, 0.0));
    }
    let chi = C64::new(0.0, omega * MU0 * mu_r * sigma).sqrt() * radius_m;
    // (chi / sigma) / (2 pi r^2) * I0/I1 = dc/2 * chi I0/I1
    Ok(z_i0_over_i1(chi) * (0.5 * dc))
}

pub fn conductor_internal_impedance(omega: f64, g: &GeometryMaterials) -> Result<C64> {
    internal_impedance(omega, g.r_cond_m(), g.sigma_cu, g.mu_r_cond)
}
