//! Depletion width of the MOS liner around a TSV.

use alloc::format;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::geometry::{GeometryMaterials, EPS0};

/// Left-hand constant `4 eps_s k T / (q^2 N_a) * ln(N_a / n_i)` in µm^2.
pub fn depletion_constant_um2(g: &GeometryMaterials) -> f64 {
    let n_a = g.n_a_cm3 * 1e6; // m^-3
    let eps = EPS0 * g.eps_s;
    let c_m2 = 4.0 * eps * g.boltzmann * g.temperature_k / (g.charge * g.charge * n_a) * (g.n_a_cm3 / g.n_i_cm3).ln();
    c_m2 * 1e12
}

/// Right-hand side of the sidewall depletion equation (µm^2) for depletion
/// width `t` (µm) around an oxide shell of radius `outer` (µm).
pub fn depletion_rhs(t: f64, outer: f64) -> f64 {
    let rt = outer + t;
    -0.5 * t * t - t * outer + rt * rt * (t / outer).ln_1p()
}

fn rhs_derivative(t: f64, outer: f64) -> f64 {
    2.0 * (outer + t) * (t / outer).ln_1p()
}

/// Non-negative root of the depletion equation (µm).
pub fn depletion_thickness(g: &GeometryMaterials) -> Result<f64> {
    if !(g.n_a_cm3 > g.n_i_cm3 && g.n_i_cm3 > 0.0) {
        return Err(Error::param("n_a_cm3", "doping must exceed the intrinsic concentration"));
    }
    let outer = g.outer_radius_um();
    if !(outer > 0.0) {
        return Err(Error::param("r_cond_um", "conductor and liner radii must be positive"));
    }
    let target = depletion_constant_um2(g);
    if target == 0.0 {
        return Ok(0.0);
    }
    let residual = |t: f64| depletion_rhs(t, outer) - target;

    let (mut lo, mut hi) = (0.0, 10.0 * outer);
    if residual(hi) < 0.0 {
        return Err(Error::NonPhysical(format!(
            "depletion equation has no root in [0, {hi}] µm (constant {target:e} µm^2)"
        )));
    }
    // Bisection to a coarse bracket, then Newton (the residual is convex
    // and increasing, so Newton from the right converges monotonically).
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if residual(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-6 * hi {
            break;
        }
    }
    let mut t = hi;
    for _ in 0..50 {
        let d = rhs_derivative(t, outer);
        if d <= 0.0 {
            break;
        }
        let step = residual(t) / d;
        let next = (t - step).clamp(lo, hi);
        let done = (next - t).abs() <= 1e-12 * next.abs();
        t = next;
        if done {
            break;
        }
    }
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn geom(n_a: f64) -> GeometryMaterials {
        GeometryMaterials { r_cond_um: 5.0, t_ins_um: 0.5, n_a_cm3: n_a, ..Default::default() }
    }

    #[test]
    fn zero_constant_gives_zero_root() {
        assert_eq!(depletion_rhs(0.0, 5.5), 0.0);
        // N_A -> n_i makes ln(N_A/n_i) -> 0.
        let g = GeometryMaterials { n_a_cm3: 1.45e10 * (1.0 + 1e-15), ..Default::default() };
        let t = depletion_thickness(&g).unwrap();
        assert!(t < 1e-3, "{t}");
    }

    #[test]
    fn residual_of_root_is_tiny() {
        let g = geom(1e15);
        let t = depletion_thickness(&g).unwrap();
        let c = depletion_constant_um2(&g);
        assert!((depletion_rhs(t, 5.5) - c).abs() < 1e-10 * c);
        assert!(t > 0.5 && t < 1.5, "{t}");
    }

    /// Dense scan of the residual as an independent root bracket.
    #[test]
    fn root_matches_dense_scan_and_decreases_with_doping() {
        let mut prev = f64::INFINITY;
        for n_a in [1e14, 2e14, 1e15, 2e15, 1e16] {
            let g = geom(n_a);
            let c = depletion_constant_um2(&g);
            let mut scan_root = None;
            let steps = 200_000;
            for i in 0..steps {
                let (a, b) = (i as f64 * 1e-4, (i + 1) as f64 * 1e-4);
                if depletion_rhs(a, 5.5) <= c && depletion_rhs(b, 5.5) > c {
                    scan_root = Some(0.5 * (a + b));
                    break;
                }
            }
            let t = depletion_thickness(&g).unwrap();
            assert!((t - scan_root.unwrap()).abs() < 1e-4, "{n_a}: {t} vs {scan_root:?}");
            assert!(t < prev);
            prev = t;
        }
    }

    #[test]
    fn unphysical_doping_reports_error() {
        let g = GeometryMaterials { n_a_cm3: 1.0, n_i_cm3: 0.5, ..Default::default() };
        assert!(matches!(depletion_thickness(&g), Err(Error::NonPhysical(_))));
    }
}
