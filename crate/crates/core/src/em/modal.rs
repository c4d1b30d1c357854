//! Per-frequency solution in the eigenbasis of the reduced inductance.
//!
//! Every per-unit-length matrix of the reduced model is a function of
//! `L_eff` (the conductor term is a multiple of the identity and the
//! substrate matrices are proportional to `L_eff^-1`), so one real
//! orthogonal transform decouples the line into scalar modes. Only the
//! top-side IMD capacitance couples modes, and it enters through an N x N
//! Schur complement.

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::linalg::{self, rmul, CMat, RMat};
use crate::rlcg::RlcgModel;
use crate::C64;

/// `exp(z) - 1` without cancellation for small `|z|`.
pub(crate) fn cexpm1(z: C64) -> C64 {
    let (s, c) = (z.im.sin(), z.im.cos());
    let half = (z.im * 0.5).sin();
    C64::new(z.re.exp_m1() * c - 2.0 * half * half, z.re.exp() * s)
}

#[derive(Debug, Clone)]
pub struct ModalSolver {
    q: RMat,
    qt: RMat,
    l: Vec<f64>,
    g: Vec<f64>,
    c: Vec<f64>,
    c_imd: RMat,
    c_ox: f64,
    h: f64,
    z_ref: f64,
}

impl ModalSolver {
    /// Fails when the liner capacitance differs between TSVs, in which case
    /// the modes do not decouple.
    pub fn new(model: &RlcgModel, z_ref: f64) -> Result<Self> {
        let n = model.signal_count();
        let c_ox = model.c_oxdep.first().copied().unwrap_or(0.0);
        if model.c_oxdep.iter().any(|&c| c != c_ox) {
            return Err(Error::Mismatch("modal solution needs identical liner capacitance on every TSV".into()));
        }
        let (vals, q) = linalg::symmetric_eigen(&model.l_eff);
        let qt = q.transpose();
        let project = |m: &RMat| -> Vec<f64> {
            let p = rmul(&rmul(&qt, m), &q);
            (0..n).map(|k| p[(k, k)]).collect()
        };
        let g = project(&model.g_sub_eff);
        let c = project(&model.c_sub_eff);
        let c_imd = linalg::symmetrize(&rmul(&rmul(&qt, &model.imd_matrix()), &q));
        Ok(ModalSolver { q, qt, l: vals.iter().copied().collect(), g, c, c_imd, c_ox, h: model.h_int_m, z_ref })
    }

    pub fn modes(&self) -> usize {
        self.l.len()
    }

    /// Port S-matrix (top ports, then bottom ports) at angular frequency
    /// `omega` given the conductor internal impedance there.
    pub fn solve(&self, omega: f64, z_cond: C64) -> Result<CMat> {
        if !(omega > 0.0) {
            return Err(Error::param("omega", alloc::format!("angular frequency must be > 0, got {omega}")));
        }
        let n = self.modes();
        let one = C64::new(1.0, 0.0);
        let jw = C64::new(0.0, omega);
        let z0 = self.z_ref;
        let d = jw * self.c_ox;
        let mut a = Vec::with_capacity(n);
        let mut beta = Vec::with_capacity(n);
        let mut schur = CMat::zeros(n, n);
        for k in 0..n {
            let z = z_cond + jw * self.l[k];
            let ys = C64::new(self.g[k], omega * self.c[k]);
            let y = d * ys / (d + ys);
            let gamma = (z * y).sqrt();
            let zc = z / gamma;
            let x = gamma * self.h;
            // 1 - exp(-2x), coth and csch in decaying exponentials
            let den = -cexpm1(-x * 2.0);
            let coth = (C64::new(2.0, 0.0) - den) / den;
            let csch = (-x).exp() * 2.0 / den;
            let p = coth / zc;
            let rho = -csch / zc;
            let ak = one + p * z0;
            let bk = rho * z0;
            let bk_over_a = bk / ak;
            schur[(k, k)] = ak - bk * bk_over_a;
            a.push(ak);
            beta.push(bk_over_a);
        }
        let e_scale = jw * z0;
        for i in 0..n {
            for j in 0..n {
                schur[(i, j)] += e_scale * self.c_imd[(i, j)];
            }
        }
        if schur.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::InvalidResult("non-finite modal line parameters".into()));
        }
        let x = linalg::invert_complex_blocked(&schur, "modal port system")?;
        Ok(self.assemble(&x, &a, &beta))
    }

    fn assemble(&self, x: &CMat, a: &[C64], beta: &[C64]) -> CMat {
        let n = self.modes();
        let (xr, xi) = linalg::split(x);
        // Q X
        let y1r = rmul(&self.q, &xr);
        let y1i = rmul(&self.q, &xi);
        // Q diag(beta) X
        let mut bxr = RMat::zeros(n, n);
        let mut bxi = RMat::zeros(n, n);
        for j in 0..n {
            for i in 0..n {
                let v = beta[i] * x[(i, j)];
                bxr[(i, j)] = v.re;
                bxi[(i, j)] = v.im;
            }
        }
        let y2r = rmul(&self.q, &bxr);
        let y2i = rmul(&self.q, &bxi);
        let times_qt = |re: &RMat, im: &RMat| linalg::join(&rmul(re, &self.qt), &rmul(im, &self.qt));
        let times_beta_qt = |re: &RMat, im: &RMat| {
            let mut sr = re.clone();
            let mut si = im.clone();
            for (j, b) in beta.iter().enumerate() {
                for i in 0..n {
                    sr[(i, j)] = re[(i, j)] * b.re - im[(i, j)] * b.im;
                    si[(i, j)] = re[(i, j)] * b.im + im[(i, j)] * b.re;
                }
            }
            times_qt(&sr, &si)
        };
        let qxq = times_qt(&y1r, &y1i);
        let qxbq = times_beta_qt(&y1r, &y1i);
        let qbxq = times_qt(&y2r, &y2i);
        let qbxbq = times_beta_qt(&y2r, &y2i);
        let inv_a: Vec<C64> = a.iter().map(|v| C64::new(1.0, 0.0) / v).collect();
        let qaq = linalg::from_modal_diag(&self.q, &inv_a);

        let two = C64::new(2.0, 0.0);
        let mut s = CMat::zeros(2 * n, 2 * n);
        for j in 0..n {
            for i in 0..n {
                let delta = if i == j { 1.0 } else { 0.0 };
                s[(i, j)] = two * qxq[(i, j)] - delta;
                s[(i, n + j)] = -two * qxbq[(i, j)];
                s[(n + i, j)] = -two * qbxq[(i, j)];
                s[(n + i, n + j)] = two * (qaq[(i, j)] + qbxbq[(i, j)]) - delta;
            }
        }
        s
    }
}
