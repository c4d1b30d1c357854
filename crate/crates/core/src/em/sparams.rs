use alloc::format;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::frequency::FrequencyGrid;
use crate::linalg::{self, CMat};
use crate::C64;

use super::chain::ChainMatrix;

pub const DEFAULT_Z_REF: f64 = 50.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Side {
    Top,
    Bottom,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PortLabel {
    /// Position in the signal list.
    pub signal: usize,
    /// Layout cell of the TSV.
    pub cell: usize,
    pub side: Side,
}

/// Multi-port scattering parameters over a frequency grid.
///
/// Port order: the top port of every signal TSV in ascending cell order,
/// then the bottom ports in the same order.
#[derive(Debug, Clone, PartialEq)]
pub struct SParameterBlock {
    pub frequencies: FrequencyGrid,
    pub ports: Vec<PortLabel>,
    pub data: Vec<CMat>,
    pub z_ref: f64,
}

impl SParameterBlock {
    pub fn new(frequencies: FrequencyGrid, signal_cells: &[usize], data: Vec<CMat>, z_ref: f64) -> Result<Self> {
        let ports = port_labels(signal_cells);
        let p = ports.len();
        if data.len() != frequencies.len() {
            return Err(Error::Mismatch(format!("{} matrices for {} frequencies", data.len(), frequencies.len())));
        }
        if let Some(m) = data.iter().find(|m| m.shape() != (p, p)) {
            return Err(Error::Mismatch(format!("matrix is {:?}, expected {p}x{p}", m.shape())));
        }
        if !(z_ref > 0.0) {
            return Err(Error::param("z_ref", format!("reference impedance must be > 0, got {z_ref}")));
        }
        Ok(SParameterBlock { frequencies, ports, data, z_ref })
    }

    pub fn port_count(&self) -> usize {
        self.ports.len()
    }

    pub fn signal_count(&self) -> usize {
        self.ports.len() / 2
    }

    pub fn top(&self, signal: usize) -> usize {
        signal
    }

    pub fn bottom(&self, signal: usize) -> usize {
        self.signal_count() + signal
    }

    pub fn signal_cells(&self) -> Vec<usize> {
        self.ports[..self.signal_count()].iter().map(|p| p.cell).collect()
    }

    pub fn at(&self, f_hz: f64) -> Result<&CMat> {
        self.frequencies
            .index_of(f_hz)
            .map(|i| &self.data[i])
            .ok_or_else(|| Error::param("frequency", format!("{f_hz} Hz is not on the sweep grid")))
    }

    /// Largest reciprocity error over the grid.
    pub fn max_reciprocity_error(&self) -> f64 {
        self.data.iter().map(reciprocity_error).fold(0.0, f64::max)
    }

    /// Largest passivity margin over the grid (<= 0 when passive).
    pub fn max_passivity_margin(&self) -> f64 {
        self.data.iter().map(passivity_margin).fold(f64::NEG_INFINITY, f64::max)
    }

    /// Reorders ports by a signal permutation: signal `i` of the result is
    /// signal `perm[i]` of `self`.
    pub fn permute_signals(&self, perm: &[usize], new_cells: &[usize]) -> Result<SParameterBlock> {
        let n = self.signal_count();
        if perm.len() != n || new_cells.len() != n {
            return Err(Error::Mismatch(format!("permutation of length {} for {n} signals", perm.len())));
        }
        let map: Vec<usize> = (0..2 * n).map(|p| if p < n { perm[p] } else { n + perm[p - n] }).collect();
        let data = self.data.iter().map(|m| CMat::from_fn(2 * n, 2 * n, |i, j| m[(map[i], map[j])])).collect();
        SParameterBlock::new(self.frequencies.clone(), new_cells, data, self.z_ref)
    }
}

pub fn port_labels(signal_cells: &[usize]) -> Vec<PortLabel> {
    let top = signal_cells.iter().enumerate().map(|(signal, &cell)| PortLabel { signal, cell, side: Side::Top });
    let bottom = signal_cells.iter().enumerate().map(|(signal, &cell)| PortLabel { signal, cell, side: Side::Bottom });
    top.chain(bottom).collect()
}

/// S-matrix of a 2N-port given by its chain matrix, equal real reference
/// impedance at every port.
pub fn chain_to_s(chain: &ChainMatrix, z_ref: f64) -> Result<CMat> {
    if !(z_ref > 0.0) {
        return Err(Error::param("z_ref", format!("reference impedance must be > 0, got {z_ref}")));
    }
    let n = chain.conductors();
    let inv_z = C64::new(1.0 / z_ref, 0.0);
    let zr = C64::new(z_ref, 0.0);
    let id = CMat::identity(n, n);
    let b_scaled = &chain.b * inv_z;
    let c_scaled = &chain.c * zr;
    let mut lhs = CMat::zeros(2 * n, 2 * n);
    let mut rhs = CMat::zeros(2 * n, 2 * n);
    lhs.view_mut((0, 0), (n, n)).copy_from(&id);
    lhs.view_mut((0, n), (n, n)).copy_from(&-(&chain.a + &b_scaled));
    lhs.view_mut((n, 0), (n, n)).copy_from(&-&id);
    lhs.view_mut((n, n), (n, n)).copy_from(&-(&c_scaled + &chain.d));
    rhs.view_mut((0, 0), (n, n)).copy_from(&-&id);
    rhs.view_mut((0, n), (n, n)).copy_from(&(&chain.a - &b_scaled));
    rhs.view_mut((n, 0), (n, n)).copy_from(&-&id);
    rhs.view_mut((n, n), (n, n)).copy_from(&(&c_scaled - &chain.d));
    linalg::solve_complex(&lhs, &rhs, "chain to S conversion")
}

/// S-matrix from a port admittance matrix.
pub fn admittance_to_s(y: &CMat, z_ref: f64) -> Result<CMat> {
    let n = y.nrows();
    let mut w = y * C64::new(z_ref, 0.0);
    for i in 0..n {
        w[(i, i)] += C64::new(1.0, 0.0);
    }
    let mut s = linalg::invert_complex(&w, "port admittance to S conversion")? * C64::new(2.0, 0.0);
    for i in 0..n {
        s[(i, i)] -= C64::new(1.0, 0.0);
    }
    Ok(s)
}

/// Relative Frobenius error `|a - b| / |b|` over every frequency and entry.
pub fn rfe(a: &SParameterBlock, b: &SParameterBlock) -> Result<f64> {
    if a.frequencies != b.frequencies {
        return Err(Error::Mismatch("frequency grids differ".into()));
    }
    if a.ports != b.ports {
        return Err(Error::Mismatch("port orderings differ".into()));
    }
    rfe_matrices(&a.data, &b.data)
}

pub fn rfe_matrices(a: &[CMat], b: &[CMat]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::Mismatch(format!("{} vs {} matrices", a.len(), b.len())));
    }
    let mut num = 0.0;
    let mut den = 0.0;
    for (x, y) in a.iter().zip(b) {
        if x.shape() != y.shape() {
            return Err(Error::Mismatch(format!("{:?} vs {:?}", x.shape(), y.shape())));
        }
        num += x.iter().zip(y.iter()).map(|(p, q)| (p - q).norm_sqr()).sum::<f64>();
        den += y.iter().map(|q| q.norm_sqr()).sum::<f64>();
    }
    if den == 0.0 {
        return Ok(if num == 0.0 { 0.0 } else { f64::INFINITY });
    }
    Ok((num / den).sqrt())
}

/// `max_i (sum_j |S_ij|^2 - 1)`.
pub fn passivity_margin(s: &CMat) -> f64 {
    s.row_iter().map(|r| r.iter().map(|z| z.norm_sqr()).sum::<f64>() - 1.0).fold(f64::NEG_INFINITY, f64::max)
}

pub fn reciprocity_error(s: &CMat) -> f64 {
    linalg::asymmetry_complex(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::em::chain::mtl_chain;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn matched_lossless_line() {
        let (l, cap) = (250e-9, 100e-12);
        let w = 2.0 * core::f64::consts::PI * 5e9;
        let z = CMat::from_element(1, 1, c(0.0, w * l));
        let y = CMat::from_element(1, 1, c(0.0, w * cap));
        let z0 = (l / cap).sqrt();
        let s = chain_to_s(&mtl_chain(&z, &y, 0.013).unwrap(), z0).unwrap();
        assert!(s[(0, 0)].norm() < 1e-9);
        assert!((s[(1, 0)].norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_length_is_through() {
        let s = chain_to_s(&ChainMatrix::identity(3), 50.0).unwrap();
        for i in 0..6 {
            for j in 0..6 {
                let want = if (i + 3) % 6 == j { 1.0 } else { 0.0 };
                assert!((s[(i, j)] - c(want, 0.0)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn chain_and_admittance_routes_agree() {
        // Series impedance zs between the two ports.
        let zs = c(12.0, -7.0);
        let mut chain = ChainMatrix::identity(1);
        chain.b[(0, 0)] = zs;
        let ys = c(1.0, 0.0) / zs;
        let y = CMat::from_row_slice(2, 2, &[ys, -ys, -ys, ys]);
        let a = chain_to_s(&chain, 50.0).unwrap();
        let b = admittance_to_s(&y, 50.0).unwrap();
        assert!(linalg::frobenius(&(a - b)) < 1e-14);
    }

    #[test]
    fn passivity_examples() {
        assert_eq!(passivity_margin(&CMat::identity(3, 3)), 0.0);
        assert_eq!(passivity_margin(&CMat::zeros(2, 2)), -1.0);
        let m = CMat::from_row_slice(2, 2, &[c(0.8f64.sqrt(), 0.0), c(0.0, 0.0), c(0.6, 0.0), c(0.0, 0.6f64.sqrt())]);
        // Row sums 0.8 and 0.96; scale the second to 1.2.
        let mut m2 = m.clone();
        m2[(1, 0)] = c(0.0, 0.6f64.sqrt());
        assert!((passivity_margin(&m2) - 0.2).abs() < 1e-15);
        assert!(passivity_margin(&m) < 0.0);
    }

    fn block(data: Vec<CMat>) -> SParameterBlock {
        let grid = FrequencyGrid::linear(1e9, 2e9, data.len()).unwrap();
        SParameterBlock::new(grid, &[4], data, 50.0).unwrap()
    }

    #[test]
    fn rfe_examples() {
        let a = block(alloc::vec![CMat::from_row_slice(2, 2, &[c(0.1, 0.2), c(0.9, 0.0), c(0.9, 0.0), c(0.3, -0.1)]); 2]);
        assert_eq!(rfe(&a, &a).unwrap(), 0.0);
        let scaled = block(a.data.iter().map(|m| m * c(1.1, 0.0)).collect());
        assert!((rfe(&scaled, &a).unwrap() - 0.1).abs() < 1e-15);
        let other = SParameterBlock::new(FrequencyGrid::linear(1e9, 3e9, 2).unwrap(), &[4], a.data.clone(), 50.0).unwrap();
        assert!(rfe(&a, &other).is_err());
    }

    proptest! {
        #[test]
        fn perturbation_matches_hand_ratio(vals in proptest::collection::vec(-1.0f64..1.0, 16), eps in 1e-6f64..0.5) {
            let m = CMat::from_fn(2, 2, |i, j| c(vals[2 * i + j], vals[4 + 2 * i + j]));
            let d = CMat::from_fn(2, 2, |i, j| c(vals[8 + 2 * i + j], vals[12 + 2 * i + j]));
            prop_assume!(linalg::frobenius(&m) > 1e-3 && linalg::frobenius(&d) > 1e-3);
            let d = &d * c(eps * linalg::frobenius(&m) / linalg::frobenius(&d), 0.0);
            let a = block(alloc::vec![&m + &d]);
            let b = block(alloc::vec![m]);
            prop_assert!((rfe(&a, &b).unwrap() - eps).abs() < 1e-12);
        }

        #[test]
        fn symmetric_lines_are_reciprocal(vals in proptest::collection::vec(0.0f64..1.0, 12), h in 1e-5f64..1e-2) {
            let n = 3;
            let sym = |off: usize, scale: f64, diag: f64| {
                let mut m = CMat::from_fn(n, n, |i, j| c(0.0, vals[off + i.min(j) + i.max(j)] * scale));
                for i in 0..n { m[(i, i)] += c(diag, diag * 10.0); }
                m
            };
            let z = sym(0, 200.0, 100.0);
            let y = sym(6, 0.3, 0.05);
            let s = chain_to_s(&mtl_chain(&z, &y, h).unwrap(), 50.0).unwrap();
            prop_assert!(reciprocity_error(&s) < 1e-10);
        }
    }
}
