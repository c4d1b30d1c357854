//! Chain (ABCD) matrices of uniform multiconductor lines.
//!
//! With currents flowing away from the top port at both ends,
//! `[V(0); I(0)] = [A B; C D] [V(h); I(h)]`.

use alloc::vec::Vec;

use nalgebra::Schur;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::linalg::{self, cmul, CMat};
use crate::C64;

#[derive(Debug, Clone, PartialEq)]
pub struct ChainMatrix {
    pub a: CMat,
    pub b: CMat,
    pub c: CMat,
    pub d: CMat,
}

/// How [`mtl_chain`] evaluated the matrix functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChainMethod {
    Eigen,
    Exponential,
}

impl ChainMatrix {
    pub fn identity(n: usize) -> Self {
        ChainMatrix { a: CMat::identity(n, n), b: CMat::zeros(n, n), c: CMat::zeros(n, n), d: CMat::identity(n, n) }
    }

    pub fn conductors(&self) -> usize {
        self.a.nrows()
    }

    /// `self` followed by `next`.
    pub fn cascade(&self, next: &ChainMatrix) -> ChainMatrix {
        ChainMatrix {
            a: cmul(&self.a, &next.a) + cmul(&self.b, &next.c),
            b: cmul(&self.a, &next.b) + cmul(&self.b, &next.d),
            c: cmul(&self.c, &next.a) + cmul(&self.d, &next.c),
            d: cmul(&self.c, &next.b) + cmul(&self.d, &next.d),
        }
    }

    /// Adds a shunt admittance matrix across the top port.
    pub fn with_top_shunt(&self, y: &CMat) -> ChainMatrix {
        ChainMatrix {
            a: self.a.clone(),
            b: self.b.clone(),
            c: &self.c + cmul(y, &self.a),
            d: &self.d + cmul(y, &self.b),
        }
    }

    pub fn to_block(&self) -> CMat {
        let n = self.conductors();
        let mut m = CMat::zeros(2 * n, 2 * n);
        m.view_mut((0, 0), (n, n)).copy_from(&self.a);
        m.view_mut((0, n), (n, n)).copy_from(&self.b);
        m.view_mut((n, 0), (n, n)).copy_from(&self.c);
        m.view_mut((n, n), (n, n)).copy_from(&self.d);
        m
    }

    pub fn from_block(m: &CMat) -> ChainMatrix {
        let n = m.nrows() / 2;
        ChainMatrix {
            a: m.view((0, 0), (n, n)).into_owned(),
            b: m.view((0, n), (n, n)).into_owned(),
            c: m.view((n, 0), (n, n)).into_owned(),
            d: m.view((n, n), (n, n)).into_owned(),
        }
    }
}

/// Chain matrix of a line of length `h` (m) with per-unit-length `z`, `y`.
pub fn mtl_chain(z: &CMat, y: &CMat, h: f64) -> Result<ChainMatrix> {
    mtl_chain_with_method(z, y, h).map(|(c, _)| c)
}

pub fn mtl_chain_with_method(z: &CMat, y: &CMat, h: f64) -> Result<(ChainMatrix, ChainMethod)> {
    let n = z.nrows();
    if z.shape() != (n, n) || y.shape() != (n, n) {
        return Err(Error::Mismatch(alloc::format!("Z is {:?}, Y is {:?}", z.shape(), y.shape())));
    }
    if !(h >= 0.0) || !h.is_finite() {
        return Err(Error::param("h", alloc::format!("line length must be finite and >= 0, got {h}")));
    }
    if h == 0.0 || n == 0 {
        return Ok((ChainMatrix::identity(n), ChainMethod::Eigen));
    }
    if let Some(c) = chain_by_eigen(z, y, h) {
        return Ok((c, ChainMethod::Eigen));
    }
    chain_by_exponential(z, y, h).map(|c| (c, ChainMethod::Exponential))
}

fn sinhc(x: C64) -> C64 {
    if x.norm() < 1e-3 {
        let x2 = x * x;
        C64::new(1.0, 0.0) + x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sinh() / x
    }
}

/// Eigenvectors of `k` from its complex Schur form, or `None` when the
/// basis is too ill-conditioned to trust.
fn eigen_decomposition(k: &CMat) -> Option<(Vec<C64>, CMat, CMat)> {
    let n = k.nrows();
    let (q, t) = Schur::try_new(k.clone(), f64::EPSILON, 0)?.unpack();
    let lambda: Vec<C64> = (0..n).map(|i| t[(i, i)]).collect();
    let tnorm = linalg::frobenius(&t).max(f64::MIN_POSITIVE);
    let tiny = f64::EPSILON * tnorm;
    let mut vt = CMat::zeros(n, n);
    for col in 0..n {
        vt[(col, col)] = C64::new(1.0, 0.0);
        for i in (0..col).rev() {
            let mut s = C64::new(0.0, 0.0);
            for j in (i + 1)..=col {
                s += t[(i, j)] * vt[(j, col)];
            }
            let mut den = t[(i, i)] - lambda[col];
            if den.norm() < tiny {
                den = C64::new(tiny, 0.0);
            }
            vt[(i, col)] = -s / den;
        }
    }
    let mut v = cmul(&q, &vt);
    for mut col in v.column_iter_mut() {
        let norm = col.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0) || !norm.is_finite() {
            return None;
        }
        col /= C64::new(norm, 0.0);
    }
    let vinv = v.clone().try_inverse()?;
    let mut resid = cmul(&v, &vinv);
    for i in 0..n {
        resid[(i, i)] -= C64::new(1.0, 0.0);
    }
    let cond = linalg::frobenius(&v) * linalg::frobenius(&vinv);
    if !(cond < 1e6) || linalg::frobenius(&resid) > 1e-11 {
        return None;
    }
    let mut kv = cmul(k, &v);
    for (j, l) in lambda.iter().enumerate() {
        for i in 0..n {
            kv[(i, j)] -= v[(i, j)] * l;
        }
    }
    if linalg::frobenius(&kv) > 1e-11 * tnorm {
        return None;
    }
    Some((lambda, v, vinv))
}

fn scale_columns(v: &CMat, d: &[C64]) -> CMat {
    let mut out = v.clone();
    for (j, s) in d.iter().enumerate() {
        for i in 0..out.nrows() {
            out[(i, j)] *= s;
        }
    }
    out
}

fn chain_by_eigen(z: &CMat, y: &CMat, h: f64) -> Option<ChainMatrix> {
    let zy = cmul(z, y);
    let (lambda, v, vinv) = eigen_decomposition(&zy)?;
    let gamma_h: Vec<C64> = lambda.iter().map(|l| l.sqrt() * h).collect();
    let cosh: Vec<C64> = gamma_h.iter().map(|g| g.cosh()).collect();
    // sinh(γh)/γ and (cosh(γh) - 1)/γ²
    let fs: Vec<C64> = gamma_h.iter().map(|&g| sinhc(g) * h).collect();
    let fc1: Vec<C64> = gamma_h
        .iter()
        .map(|&g| {
            let s = sinhc(g * 0.5);
            s * s * (0.5 * h * h)
        })
        .collect();
    let a = cmul(&scale_columns(&v, &cosh), &vinv);
    let g_s = cmul(&scale_columns(&v, &fs), &vinv);
    let g_c = cmul(&scale_columns(&v, &fc1), &vinv);
    let b = cmul(&g_s, z);
    let c = cmul(y, &g_s);
    let mut d = cmul(&cmul(y, &g_c), z);
    for i in 0..d.nrows() {
        d[(i, i)] += C64::new(1.0, 0.0);
    }
    let out = ChainMatrix { a, b, c, d };
    out.to_block().iter().all(|v| v.re.is_finite() && v.im.is_finite()).then_some(out)
}

const PADE13: [f64; 14] = [
    64_764_752_532_480_000.0,
    32_382_376_266_240_000.0,
    7_771_770_303_897_600.0,
    1_187_353_796_428_800.0,
    129_060_195_264_000.0,
    10_559_470_521_600.0,
    670_442_572_800.0,
    33_522_128_640.0,
    1_323_241_920.0,
    40_840_800.0,
    960_960.0,
    16_380.0,
    182.0,
    1.0,
];
const THETA13: f64 = 5.371_920_351_148_152;

fn norm1(m: &CMat) -> f64 {
    m.column_iter().map(|c| c.iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max)
}

/// Matrix exponential by scaling and squaring with a degree-13 Padé
/// approximant.
pub fn expm(m: &CMat) -> Result<CMat> {
    let n = m.nrows();
    let norm = norm1(m);
    if !norm.is_finite() {
        return Err(Error::InvalidResult("matrix exponential of a non-finite matrix".into()));
    }
    let s = if norm > THETA13 { (norm / THETA13).log2().ceil() as i32 } else { 0 };
    let a = m * C64::new(2f64.powi(-s), 0.0);
    let id = CMat::identity(n, n);
    let a2 = cmul(&a, &a);
    let a4 = cmul(&a2, &a2);
    let a6 = cmul(&a4, &a2);
    let b = |k: usize| C64::new(PADE13[k], 0.0);
    let u_inner = &a6 * b(13) + &a4 * b(11) + &a2 * b(9);
    let u = cmul(&a, &(cmul(&a6, &u_inner) + &a6 * b(7) + &a4 * b(5) + &a2 * b(3) + &id * b(1)));
    let v_inner = &a6 * b(12) + &a4 * b(10) + &a2 * b(8);
    let v = cmul(&a6, &v_inner) + &a6 * b(6) + &a4 * b(4) + &a2 * b(2) + &id * b(0);
    let mut r = linalg::solve_complex(&(&v - &u), &(&v + &u), "Padé denominator")?;
    for _ in 0..s {
        r = cmul(&r, &r);
    }
    Ok(r)
}

/// Chain matrix as `exp([[0, Z], [Y, 0]] h)`, with the off-diagonal blocks
/// balanced by a scalar diagonal similarity.
pub fn chain_by_exponential(z: &CMat, y: &CMat, h: f64) -> Result<ChainMatrix> {
    let n = z.nrows();
    let zn = linalg::frobenius(z);
    let yn = linalg::frobenius(y);
    let s = if zn > 0.0 && yn > 0.0 { (zn / yn).sqrt() } else { 1.0 };
    let mut m = CMat::zeros(2 * n, 2 * n);
    m.view_mut((0, n), (n, n)).copy_from(&(z * C64::new(h / s, 0.0)));
    m.view_mut((n, 0), (n, n)).copy_from(&(y * C64::new(h * s, 0.0)));
    let e = expm(&m)?;
    let mut out = ChainMatrix::from_block(&e);
    out.b *= C64::new(s, 0.0);
    out.c /= C64::new(s, 0.0);
    Ok(out)
}
