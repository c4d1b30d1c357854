//! The dihedral group of the square acting on layouts.
//!
//! Rotations are clockwise. Reflection axes: vertical (`col -> N-1-col`),
//! horizontal (`row -> M-1-row`), main diagonal (transpose) and
//! anti-diagonal.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::layout::{Role, TsvLayout};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum D4Transform {
    Identity,
    Rot90,
    Rot180,
    Rot270,
    FlipVertical,
    FlipHorizontal,
    Transpose,
    AntiTranspose,
}

impl D4Transform {
    pub const ALL: [D4Transform; 8] = [
        D4Transform::Identity,
        D4Transform::Rot90,
        D4Transform::Rot180,
        D4Transform::Rot270,
        D4Transform::FlipVertical,
        D4Transform::FlipHorizontal,
        D4Transform::Transpose,
        D4Transform::AntiTranspose,
    ];

    pub fn is_rotation(self) -> bool {
        matches!(self, D4Transform::Rot90 | D4Transform::Rot180 | D4Transform::Rot270)
    }

    /// Whether the transform maps an `M x N` grid onto an `N x M` grid.
    fn swaps_axes(self) -> bool {
        matches!(
            self,
            D4Transform::Rot90 | D4Transform::Rot270 | D4Transform::Transpose | D4Transform::AntiTranspose
        )
    }

    /// Shape of the image grid, or an error when the transform is not defined
    /// on an `rows x cols` grid.
    pub fn image_shape(self, rows: usize, cols: usize) -> Result<(usize, usize)> {
        if self.is_rotation() && rows != cols {
            return Err(Error::NotSquare { rows, cols });
        }
        Ok(if self.swaps_axes() { (cols, rows) } else { (rows, cols) })
    }

    /// Image of `(row, col)` on an `rows x cols` grid.
    pub fn map_position(self, row: usize, col: usize, rows: usize, cols: usize) -> (usize, usize) {
        let (mr, mc) = (rows - 1, cols - 1);
        match self {
            D4Transform::Identity => (row, col),
            D4Transform::Rot90 => (col, mr - row),
            D4Transform::Rot180 => (mr - row, mc - col),
            D4Transform::Rot270 => (mc - col, row),
            D4Transform::FlipVertical => (row, mc - col),
            D4Transform::FlipHorizontal => (mr - row, col),
            D4Transform::Transpose => (col, row),
            D4Transform::AntiTranspose => (mc - col, mr - row),
        }
    }

    /// `map[i]` is the image index of source cell `i`.
    pub fn cell_map(self, rows: usize, cols: usize) -> Result<Vec<usize>> {
        let (_, new_cols) = self.image_shape(rows, cols)?;
        Ok((0..rows * cols)
            .map(|i| {
                let (r, c) = self.map_position(i / cols, i % cols, rows, cols);
                r * new_cols + c
            })
            .collect())
    }

    /// The element `self ∘ other` (apply `other` first).
    pub fn compose(self, other: D4Transform) -> D4Transform {
        let probe = |t: D4Transform, first: Option<D4Transform>| -> Vec<usize> {
            let mut m: Vec<usize> = (0..9).collect();
            if let Some(f) = first {
                let fm = f.cell_map(3, 3).expect("3x3 is square");
                m = m.iter().map(|&i| fm[i]).collect();
            }
            let tm = t.cell_map(3, 3).expect("3x3 is square");
            m.iter().map(|&i| tm[i]).collect()
        };
        let target = probe(self, Some(other));
        D4Transform::ALL
            .into_iter()
            .find(|&t| probe(t, None) == target)
            .expect("D4 is closed under composition")
    }

    pub fn inverse(self) -> D4Transform {
        match self {
            D4Transform::Rot90 => D4Transform::Rot270,
            D4Transform::Rot270 => D4Transform::Rot90,
            t => t,
        }
    }
}

pub fn apply_d4(layout: &TsvLayout, t: D4Transform) -> Result<TsvLayout> {
    let (rows, cols) = (layout.rows(), layout.cols());
    let (new_rows, new_cols) = t.image_shape(rows, cols)?;
    let map = t.cell_map(rows, cols)?;
    let mut roles = vec![Role::Empty; rows * cols];
    for (src, &dst) in map.iter().enumerate() {
        roles[dst] = layout.role(src);
    }
    TsvLayout::new(new_rows, new_cols, roles)
}

/// Lexicographically smallest role sequence over the orbit, together with a
/// transform that produces it.
pub fn canonical_with_transform(layout: &TsvLayout) -> Result<(TsvLayout, D4Transform)> {
    if !layout.is_square() {
        return Err(Error::NotSquare { rows: layout.rows(), cols: layout.cols() });
    }
    let mut best: Option<(TsvLayout, D4Transform)> = None;
    for t in D4Transform::ALL {
        let image = apply_d4(layout, t)?;
        if best.as_ref().is_none_or(|(b, _)| image.roles() < b.roles()) {
            best = Some((image, t));
        }
    }
    Ok(best.expect("D4 is non-empty"))
}

pub fn canonical_form(layout: &TsvLayout) -> Result<TsvLayout> {
    canonical_with_transform(layout).map(|(l, _)| l)
}

/// Distinct members of the orbit of `layout`.
pub fn orbit(layout: &TsvLayout) -> Result<Vec<TsvLayout>> {
    let mut members: Vec<TsvLayout> = Vec::with_capacity(8);
    for t in D4Transform::ALL {
        let image = apply_d4(layout, t)?;
        if !members.contains(&image) {
            members.push(image);
        }
    }
    Ok(members)
}
