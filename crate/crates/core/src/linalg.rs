//! Dense matrix helpers on top of nalgebra.
//!
//! Products go through `matrixmultiply` directly because nalgebra only uses
//! the blocked kernels for real matrices and only when `std` is enabled.

use nalgebra::{DMatrix, SymmetricEigen};
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::C64;

pub type RMat = DMatrix<f64>;
pub type CMat = DMatrix<C64>;

/// Relative pivot size below which a factorization is treated as singular.
pub const SINGULAR_RTOL: f64 = 1e-12;

pub fn rmul(a: &RMat, b: &RMat) -> RMat {
    assert_eq!(a.ncols(), b.nrows(), "inner dimensions differ");
    let (m, k, n) = (a.nrows(), a.ncols(), b.ncols());
    let mut c = RMat::zeros(m, n);
    if m == 0 || n == 0 || k == 0 {
        return c;
    }
    // SAFETY: column-major buffers with the strides nalgebra uses; `c` does
    // not alias `a` or `b`.
    unsafe {
        matrixmultiply::dgemm(
            m,
            k,
            n,
            1.0,
            a.as_ptr(),
            1,
            m as isize,
            b.as_ptr(),
            1,
            k as isize,
            0.0,
            c.as_mut_ptr(),
            1,
            m as isize,
        );
    }
    c
}

pub fn cmul(a: &CMat, b: &CMat) -> CMat {
    assert_eq!(a.ncols(), b.nrows(), "inner dimensions differ");
    let (m, k, n) = (a.nrows(), a.ncols(), b.ncols());
    let mut c = CMat::zeros(m, n);
    if m == 0 || n == 0 || k == 0 {
        return c;
    }
    let one = [1.0, 0.0];
    let zero = [0.0, 0.0];
    // SAFETY: Complex<f64> is repr(C) with layout [re, im], matching c64.
    unsafe {
        matrixmultiply::zgemm(
            matrixmultiply::CGemmOption::Standard,
            matrixmultiply::CGemmOption::Standard,
            m,
            k,
            n,
            one,
            a.as_ptr() as *const [f64; 2],
            1,
            m as isize,
            b.as_ptr() as *const [f64; 2],
            1,
            k as isize,
            zero,
            c.as_mut_ptr() as *mut [f64; 2],
            1,
            m as isize,
        );
    }
    c
}

pub fn split(m: &CMat) -> (RMat, RMat) {
    (m.map(|z| z.re), m.map(|z| z.im))
}

pub fn join(re: &RMat, im: &RMat) -> CMat {
    re.zip_map(im, C64::new)
}

pub fn complexify(m: &RMat) -> CMat {
    m.map(|x| C64::new(x, 0.0))
}

/// `q * m` for real `q`.
pub fn real_times_complex(q: &RMat, m: &CMat) -> CMat {
    let (re, im) = split(m);
    join(&rmul(q, &re), &rmul(q, &im))
}

/// `m * q` for real `q`.
pub fn complex_times_real(m: &CMat, q: &RMat) -> CMat {
    let (re, im) = split(m);
    join(&rmul(&re, q), &rmul(&im, q))
}

/// `q * m * q^T` for real `q`.
pub fn congruence(q: &RMat, m: &CMat) -> CMat {
    complex_times_real(&real_times_complex(q, m), &q.transpose())
}

/// `q * diag(d) * q^T` for real `q` and complex `d`.
pub fn from_modal_diag(q: &RMat, d: &[C64]) -> CMat {
    let n = q.nrows();
    let mut qr = q.clone();
    let mut qi = q.clone();
    for (j, dj) in d.iter().enumerate() {
        for i in 0..n {
            let v = q[(i, j)];
            qr[(i, j)] = v * dj.re;
            qi[(i, j)] = v * dj.im;
        }
    }
    let qt = q.transpose();
    join(&rmul(&qr, &qt), &rmul(&qi, &qt))
}

pub fn frobenius(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn frobenius_real(m: &RMat) -> f64 {
    m.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Relative asymmetry `|A - A^T|_F / |A|_F` (0 for the zero matrix).
pub fn asymmetry(m: &RMat) -> f64 {
    let norm = frobenius_real(m);
    if norm == 0.0 {
        return 0.0;
    }
    frobenius_real(&(m - m.transpose())) / norm
}

pub fn asymmetry_complex(m: &CMat) -> f64 {
    let norm = frobenius(m);
    if norm == 0.0 {
        return 0.0;
    }
    frobenius(&(m - m.transpose())) / norm
}

pub fn symmetrize(m: &RMat) -> RMat {
    (m + m.transpose()) * 0.5
}

/// Eigen-decomposition of a real symmetric matrix with eigenvalues sorted
/// ascending.
pub fn symmetric_eigen(m: &RMat) -> (nalgebra::DVector<f64>, RMat) {
    let eig = SymmetricEigen::new(m.clone());
    let n = m.nrows();
    let mut order: alloc::vec::Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let vals = nalgebra::DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let mut vecs = RMat::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vecs.set_column(dst, &eig.eigenvectors.column(src));
    }
    (vals, vecs)
}

/// Condition number of a real symmetric matrix from its spectrum; infinite
/// when the smallest eigenvalue magnitude vanishes.
pub fn symmetric_condition(m: &RMat) -> f64 {
    if m.nrows() == 0 {
        return 1.0;
    }
    let (vals, _) = symmetric_eigen(m);
    let max = vals.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let min = vals.iter().fold(f64::INFINITY, |a, v| a.min(v.abs()));
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

fn pivot_ratio<T: nalgebra::ComplexField<RealField = f64>>(lu: &nalgebra::LU<T, nalgebra::Dyn, nalgebra::Dyn>) -> f64 {
    let u = lu.u();
    let mut max = 0.0f64;
    let mut min = f64::INFINITY;
    for i in 0..u.nrows() {
        let p = u[(i, i)].clone().abs();
        max = max.max(p);
        min = min.min(p);
    }
    if max == 0.0 {
        0.0
    } else {
        min / max
    }
}

pub fn invert_real(m: &RMat, context: &'static str) -> Result<RMat> {
    let lu = m.clone().lu();
    let ratio = pivot_ratio(&lu);
    if !(ratio > SINGULAR_RTOL) {
        return Err(Error::Singular { context, condition: 1.0 / ratio });
    }
    lu.try_inverse().ok_or(Error::Singular { context, condition: f64::INFINITY })
}

pub fn invert_complex(m: &CMat, context: &'static str) -> Result<CMat> {
    let lu = m.clone().lu();
    let ratio = pivot_ratio(&lu);
    if !(ratio > SINGULAR_RTOL) {
        return Err(Error::Singular { context, condition: 1.0 / ratio });
    }
    lu.try_inverse().ok_or(Error::Singular { context, condition: f64::INFINITY })
}

/// Solves `a x = b` for complex matrices.
pub fn solve_complex(a: &CMat, b: &CMat, context: &'static str) -> Result<CMat> {
    let lu = a.clone().lu();
    let ratio = pivot_ratio(&lu);
    if !(ratio > SINGULAR_RTOL) {
        return Err(Error::Singular { context, condition: 1.0 / ratio });
    }
    lu.solve(b).ok_or(Error::Singular { context, condition: f64::INFINITY })
}

/// Inverse by recursive 2x2 blocking so the bulk of the work runs through
/// [`cmul`]. Intended for well-conditioned, diagonally dominant matrices;
/// falls back to pivoted LU when the residual on probe vectors is not small.
pub fn invert_complex_blocked(m: &CMat, context: &'static str) -> Result<CMat> {
    let n = m.nrows();
    if n <= BLOCK_BASE {
        return invert_complex(m, context);
    }
    if let Some(x) = block_inverse(m) {
        // Two probe vectors instead of the full product keep the check O(n^2).
        let ok = (0..2).all(|p| {
            let v = nalgebra::DVector::from_fn(n, |i, _| C64::from_polar(1.0, (i * (2 * p + 3)) as f64 * 0.61));
            let r = m * (&x * &v) - &v;
            r.norm() <= 1e-11 * v.norm()
        });
        if ok {
            return Ok(x);
        }
    }
    invert_complex(m, context)
}

const BLOCK_BASE: usize = 32;

fn block_inverse(m: &CMat) -> Option<CMat> {
    let n = m.nrows();
    if n <= BLOCK_BASE {
        return m.clone().try_inverse();
    }
    let k = n / 2;
    let a = m.view((0, 0), (k, k)).into_owned();
    let b = m.view((0, k), (k, n - k)).into_owned();
    let c = m.view((k, 0), (n - k, k)).into_owned();
    let d = m.view((k, k), (n - k, n - k)).into_owned();
    let ai = block_inverse(&a)?;
    let ai_b = cmul(&ai, &b);
    let c_ai = cmul(&c, &ai);
    let s = d - cmul(&c, &ai_b);
    let si = block_inverse(&s)?;
    let x12 = -cmul(&ai_b, &si);
    let x21 = -cmul(&si, &c_ai);
    let x11 = ai - cmul(&x12, &c_ai);
    let mut out = CMat::zeros(n, n);
    out.view_mut((0, 0), (k, k)).copy_from(&x11);
    out.view_mut((0, k), (k, n - k)).copy_from(&x12);
    out.view_mut((k, 0), (n - k, k)).copy_from(&x21);
    out.view_mut((k, k), (n - k, n - k)).copy_from(&si);
    if out.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Some(out)
    } else {
        None
    }
}

pub fn cidentity(n: usize) -> CMat {
    CMat::identity(n, n)
}

pub fn cdiag(d: &[C64]) -> CMat {
    CMat::from_diagonal(&nalgebra::DVector::from_column_slice(d))
}
