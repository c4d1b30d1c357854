//! Signal/ground assignments as bitmasks (bit `i` set = cell `i` carries a
//! signal, every other cell is ground) and their D4 orbits.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::layout::{Role, TsvLayout};
use crate::symmetry::D4Transform;

/// Largest grid the bitmask enumeration supports.
pub const MAX_CELLS: usize = 64;

pub fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u64, |acc, i| acc * (n - i) as u64 / (i + 1) as u64)
}

/// Lexicographic stream of the sorted signal-index tuples of length `k`
/// over `n` cells, yielded as masks.
#[derive(Debug, Clone)]
pub struct LayoutStream {
    rows: usize,
    cols: usize,
    idx: Vec<usize>,
    done: bool,
}

impl LayoutStream {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn signals(&self) -> usize {
        self.idx.len()
    }

    /// Number of layouts the full stream yields.
    pub fn total(&self) -> u64 {
        binomial(self.rows * self.cols, self.idx.len())
    }
}

impl Iterator for LayoutStream {
    type Item = u64;

    fn next(&mut self) -> Option<u64> {
        if self.done {
            return None;
        }
        let mask = self.idx.iter().fold(0u64, |m, &i| m | 1 << i);
        let n = self.rows * self.cols;
        let k = self.idx.len();
        match (0..k).rev().find(|&i| self.idx[i] < n - k + i) {
            Some(i) => {
                self.idx[i] += 1;
                for j in i + 1..k {
                    self.idx[j] = self.idx[j - 1] + 1;
                }
            }
            None => self.done = true,
        }
        Some(mask)
    }
}

fn check_grid(rows: usize, cols: usize) -> Result<usize> {
    let n = rows * cols;
    if rows == 0 || cols == 0 || n > MAX_CELLS {
        return Err(Error::param("grid", alloc::format!("{rows}x{cols} grid must have 1..={MAX_CELLS} cells")));
    }
    Ok(n)
}

/// Every placement of `n_signal` signals on the grid, remaining cells
/// ground.
pub fn enumerate_layouts(rows: usize, cols: usize, n_signal: usize) -> Result<LayoutStream> {
    let n = check_grid(rows, cols)?;
    if n_signal == 0 || n_signal >= n {
        return Err(Error::param(
            "n_signal",
            alloc::format!("need 0 < signals < {n} so at least one ground remains, got {n_signal}"),
        ));
    }
    Ok(LayoutStream { rows, cols, idx: (0..n_signal).collect(), done: false })
}

/// Walks the stream without building layouts.
pub fn count_layouts(rows: usize, cols: usize, n_signal: usize) -> Result<u64> {
    Ok(enumerate_layouts(rows, cols, n_signal)?.count() as u64)
}

pub fn mask_to_layout(mask: u64, rows: usize, cols: usize) -> Result<TsvLayout> {
    let n = check_grid(rows, cols)?;
    if n < 64 && mask >> n != 0 {
        return Err(Error::param("mask", alloc::format!("mask {mask:#x} has bits beyond {n} cells")));
    }
    let roles = (0..n).map(|i| if mask >> i & 1 == 1 { Role::Signal } else { Role::Ground }).collect();
    TsvLayout::new(rows, cols, roles)
}

/// Byte-wise lookup tables mapping a mask through each D4 transform of a
/// square grid.
#[derive(Debug, Clone)]
pub struct MaskSymmetry {
    cells: usize,
    /// `tables[t][byte][value]`.
    tables: Vec<Vec<[u64; 256]>>,
}

impl MaskSymmetry {
    pub fn new(side: usize) -> Result<Self> {
        let cells = check_grid(side, side)?;
        let bytes = cells.div_ceil(8);
        let mut tables = Vec::with_capacity(8);
        for t in D4Transform::ALL {
            let map = t.cell_map(side, side)?;
            let mut per_byte = vec![[0u64; 256]; bytes];
            for (b, table) in per_byte.iter_mut().enumerate() {
                for (v, out) in table.iter_mut().enumerate() {
                    for bit in 0..8 {
                        let cell = 8 * b + bit;
                        if v >> bit & 1 == 1 && cell < cells {
                            *out |= 1 << map[cell];
                        }
                    }
                }
            }
            tables.push(per_byte);
        }
        Ok(MaskSymmetry { cells, tables })
    }

    pub fn cells(&self) -> usize {
        self.cells
    }

    pub fn apply(&self, t: usize, mask: u64) -> u64 {
        self.tables[t].iter().enumerate().fold(0, |acc, (b, table)| acc | table[(mask >> (8 * b) & 0xff) as usize])
    }

    /// Orbit member whose role vector is lexicographically smallest: the
    /// first differing cell is ground rather than signal, which is the
    /// smallest bit-reversed mask.
    pub fn canonical(&self, mask: u64) -> u64 {
        (0..8).map(|t| self.apply(t, mask)).min_by_key(|m| m.reverse_bits()).unwrap_or(mask)
    }

    pub fn is_canonical(&self, mask: u64) -> bool {
        let key = mask.reverse_bits();
        (1..8).all(|t| self.apply(t, mask).reverse_bits() >= key)
    }

    /// Number of distinct images of the mask.
    pub fn orbit_size(&self, mask: u64) -> usize {
        let mut images = [0u64; 8];
        for (t, img) in images.iter_mut().enumerate() {
            *img = self.apply(t, mask);
        }
        images.sort_unstable();
        1 + images.windows(2).filter(|w| w[0] != w[1]).count()
    }
}

/// Canonical representatives of a stream together with their orbit sizes.
pub struct SymmetryReduced<I> {
    inner: I,
    sym: MaskSymmetry,
}

impl<I: Iterator<Item = u64>> Iterator for SymmetryReduced<I> {
    type Item = (u64, usize);

    fn next(&mut self) -> Option<(u64, usize)> {
        for mask in self.inner.by_ref() {
            if self.sym.is_canonical(mask) {
                return Some((mask, self.sym.orbit_size(mask)));
            }
        }
        None
    }
}

pub fn symmetry_reduce(stream: LayoutStream) -> Result<SymmetryReduced<LayoutStream>> {
    if stream.rows() != stream.cols() {
        return Err(Error::NotSquare { rows: stream.rows(), cols: stream.cols() });
    }
    Ok(SymmetryReduced { sym: MaskSymmetry::new(stream.rows())?, inner: stream })
}

/// Orbit count by Burnside's lemma: the mean over the eight transforms of
/// the number of `k`-subsets each one fixes, a fixed subset being a union
/// of whole cycles of the cell permutation.
pub fn burnside_orbit_count(side: usize, k: usize) -> Result<u64> {
    let cells = check_grid(side, side)?;
    let mut total = 0u64;
    for t in D4Transform::ALL {
        let map = t.cell_map(side, side)?;
        let mut seen = vec![false; cells];
        let mut ways = vec![0u64; k + 1];
        ways[0] = 1;
        for start in 0..cells {
            if seen[start] {
                continue;
            }
            let mut len = 0;
            let mut c = start;
            while !seen[c] {
                seen[c] = true;
                c = map[c];
                len += 1;
            }
            for s in (len..=k).rev() {
                ways[s] += ways[s - len];
            }
        }
        total += ways[k];
    }
    Ok(total / 8)
}
