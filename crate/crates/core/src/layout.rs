//! Signal/ground assignments on a rectangular TSV grid.
//!
//! Cells are indexed row-major: `(row, col) -> row * cols + col`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::geometry::GeometryMaterials;

/// Functional role of one grid position.
///
/// The derived ordering (`Ground < Empty < Signal`) matches the numeric codes
/// `-1 < 0 < 1` and is what canonical forms are minimized over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Role {
    Ground,
    Empty,
    Signal,
}

impl Role {
    pub fn code(self) -> i8 {
        match self {
            Role::Ground => -1,
            Role::Empty => 0,
            Role::Signal => 1,
        }
    }

    pub fn from_code(code: i64) -> Option<Role> {
        match code {
            -1 => Some(Role::Ground),
            0 => Some(Role::Empty),
            1 => Some(Role::Signal),
            _ => None,
        }
    }

    pub fn is_occupied(self) -> bool {
        self != Role::Empty
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
#[cfg_attr(
    feature = "serde",
    derive(serde::Serialize, serde::Deserialize),
    serde(try_from = "LayoutRepr", into = "LayoutRepr")
)]
pub struct TsvLayout {
    rows: usize,
    cols: usize,
    roles: Vec<Role>,
}

/// Wire form: `{"rows":M,"cols":N,"roles":[1,0,-1,...]}`.
#[cfg(feature = "serde")]
#[derive(serde::Serialize, serde::Deserialize)]
struct LayoutRepr {
    rows: usize,
    cols: usize,
    roles: Vec<i8>,
}

#[cfg(feature = "serde")]
impl TryFrom<LayoutRepr> for TsvLayout {
    type Error = Error;

    fn try_from(r: LayoutRepr) -> Result<Self> {
        let roles = r
            .roles
            .iter()
            .map(|&c| {
                Role::from_code(c as i64)
                    .ok_or_else(|| Error::InvalidLayout(format!("role code {c} not in {{1,0,-1}}")))
            })
            .collect::<Result<Vec<_>>>()?;
        TsvLayout::new(r.rows, r.cols, roles)
    }
}

#[cfg(feature = "serde")]
impl From<TsvLayout> for LayoutRepr {
    fn from(l: TsvLayout) -> Self {
        LayoutRepr { rows: l.rows, cols: l.cols, roles: l.roles.iter().map(|r| r.code()).collect() }
    }
}

impl TsvLayout {
    pub fn new(rows: usize, cols: usize, roles: Vec<Role>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidLayout(format!("grid must be non-empty, got {rows}x{cols}")));
        }
        if roles.len() != rows * cols {
            return Err(Error::InvalidLayout(format!(
                "{} roles given for a {rows}x{cols} grid",
                roles.len()
            )));
        }
        Ok(TsvLayout { rows, cols, roles })
    }

    /// Builds a layout from signal and ground cell sets; unlisted cells are
    /// empty.
    pub fn build(rows: usize, cols: usize, signal_cells: &[usize], ground_cells: &[usize]) -> Result<Self> {
        let mut layout = TsvLayout::new(rows, cols, vec![Role::Empty; rows * cols])?;
        for (&idx, role) in signal_cells
            .iter()
            .map(|i| (i, Role::Signal))
            .chain(ground_cells.iter().map(|i| (i, Role::Ground)))
        {
            if idx >= rows * cols {
                return Err(Error::IndexOutOfRange { index: idx, rows, cols });
            }
            let slot = &mut layout.roles[idx];
            if *slot != Role::Empty && *slot != role {
                return Err(Error::OverlappingRoles(idx));
            }
            *slot = role;
        }
        Ok(layout)
    }

    /// Fully populated layout with the given signal cells; every other cell
    /// is ground.
    pub fn from_signal_cells(rows: usize, cols: usize, signal_cells: &[usize]) -> Result<Self> {
        let grounds: Vec<usize> = (0..rows * cols).filter(|i| !signal_cells.contains(i)).collect();
        Self::build(rows, cols, signal_cells, &grounds)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn cell_count(&self) -> usize {
        self.roles.len()
    }

    pub fn roles(&self) -> &[Role] {
        &self.roles
    }

    pub fn role(&self, index: usize) -> Role {
        self.roles[index]
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn position(&self, index: usize) -> (usize, usize) {
        (index / self.cols, index % self.cols)
    }

    pub fn index(&self, row: usize, col: usize) -> usize {
        row * self.cols + col
    }

    fn indices_with(&self, role: Role) -> Vec<usize> {
        self.roles.iter().enumerate().filter(|(_, &r)| r == role).map(|(i, _)| i).collect()
    }

    pub fn signal_cells(&self) -> Vec<usize> {
        self.indices_with(Role::Signal)
    }

    pub fn ground_cells(&self) -> Vec<usize> {
        self.indices_with(Role::Ground)
    }

    pub fn occupied_cells(&self) -> Vec<usize> {
        self.roles.iter().enumerate().filter(|(_, r)| r.is_occupied()).map(|(i, _)| i).collect()
    }

    pub fn count(&self, role: Role) -> usize {
        self.roles.iter().filter(|&&r| r == role).count()
    }

    /// Number of occupied cells (`n_TSV`).
    pub fn n_tsv(&self) -> usize {
        self.roles.iter().filter(|r| r.is_occupied()).count()
    }

    /// Sparsity factor `n_TSV / (M N)`.
    pub fn occupancy(&self) -> f64 {
        self.n_tsv() as f64 / self.cell_count() as f64
    }

    /// At least one signal and one ground TSV.
    pub fn is_electrically_solvable(&self) -> bool {
        self.count(Role::Signal) > 0 && self.count(Role::Ground) > 0
    }

    pub fn ensure_solvable(&self) -> Result<()> {
        if self.count(Role::Signal) == 0 {
            return Err(Error::Unsolvable("layout has no signal TSV"));
        }
        if self.count(Role::Ground) == 0 {
            return Err(Error::Unsolvable("layout has no ground TSV"));
        }
        Ok(())
    }

    /// Cell-center coordinates in µm, origin at the center of cell (0, 0).
    pub fn cell_center_um(&self, index: usize, pitch_um: f64) -> (f64, f64) {
        let (r, c) = self.position(index);
        (c as f64 * pitch_um, r as f64 * pitch_um)
    }
}

/// Symmetric center-to-center distances (µm) between the occupied cells of a
/// layout, in ascending cell order.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    cells: Vec<usize>,
    data: Vec<f64>,
}

impl DistanceMatrix {
    pub fn cells(&self) -> &[usize] {
        &self.cells
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// Distance between the `a`-th and `b`-th occupied cells.
    pub fn get(&self, a: usize, b: usize) -> f64 {
        self.data[a * self.cells.len() + b]
    }

    /// Distance between two cells given by grid index.
    pub fn between_cells(&self, cell_a: usize, cell_b: usize) -> Option<f64> {
        let a = self.cells.binary_search(&cell_a).ok()?;
        let b = self.cells.binary_search(&cell_b).ok()?;
        Some(self.get(a, b))
    }
}

pub fn pairwise_distances(layout: &TsvLayout, g: &GeometryMaterials) -> Result<DistanceMatrix> {
    let cells = layout.occupied_cells();
    if cells.len() < 2 {
        return Err(Error::InvalidLayout(format!(
            "distance matrix needs at least 2 occupied cells, found {}",
            cells.len()
        )));
    }
    let n = cells.len();
    let mut data = vec![0.0; n * n];
    for a in 0..n {
        let (xa, ya) = layout.cell_center_um(cells[a], g.p_int_um);
        for b in (a + 1)..n {
            let (xb, yb) = layout.cell_center_um(cells[b], g.p_int_um);
            let d = (xa - xb).hypot(ya - yb);
            data[a * n + b] = d;
            data[b * n + a] = d;
        }
    }
    Ok(DistanceMatrix { cells, data })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fig8_style_full_layout() {
        let signals: Vec<usize> = (0..25).step_by(2).take(12).collect();
        let l = TsvLayout::from_signal_cells(5, 5, &signals).unwrap();
        assert_eq!(l.count(Role::Signal), 12);
        assert_eq!(l.count(Role::Ground), 13);
        assert_eq!(l.n_tsv(), 25);
        assert_eq!(l.occupancy(), 1.0);
    }

    #[test]
    fn single_signal_is_unsolvable() {
        let l = TsvLayout::build(1, 1, &[0], &[]).unwrap();
        assert!(!l.is_electrically_solvable());
        assert!(matches!(l.ensure_solvable(), Err(Error::Unsolvable(_))));
    }

    #[test]
    fn sparse_3x3_occupancy() {
        let l = TsvLayout::build(3, 3, &[4], &[0, 2, 6, 8]).unwrap();
        assert_eq!(l.n_tsv(), 5);
        assert_eq!(l.occupancy(), 5.0 / 9.0);
        assert_eq!(l.role(1), Role::Empty);
    }

    #[test]
    fn build_rejects_overlap_and_range() {
        assert_eq!(TsvLayout::build(2, 2, &[0, 1], &[1]), Err(Error::OverlappingRoles(1)));
        assert!(matches!(
            TsvLayout::build(2, 2, &[4], &[]),
            Err(Error::IndexOutOfRange { index: 4, .. })
        ));
        assert!(TsvLayout::new(2, 2, vec![Role::Empty; 3]).is_err());
    }

    #[test]
    fn distances_on_pitch_grid() {
        let g = GeometryMaterials { p_int_um: 60.0, ..Default::default() };
        let l = TsvLayout::build(2, 2, &[0], &[1, 2, 3]).unwrap();
        let d = pairwise_distances(&l, &g).unwrap();
        assert_eq!(d.between_cells(0, 1), Some(60.0));
        assert_eq!(d.get(2, 2), 0.0);

        let g = GeometryMaterials { p_int_um: 20.0, ..Default::default() };
        let d = pairwise_distances(&l, &g).unwrap();
        let diag = d.between_cells(0, 3).unwrap();
        assert!((diag - 28.284_271_247_461_902).abs() < 1e-12);
        assert_eq!(d.get(1, 2), d.get(2, 1));
    }

    #[test]
    fn distances_need_two_cells() {
        let l = TsvLayout::build(2, 2, &[0], &[]).unwrap();
        assert!(pairwise_distances(&l, &GeometryMaterials::default()).is_err());
    }
}
