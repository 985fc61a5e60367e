//! Node masks on the grid and the discrete Schrödinger operator `−Δ_h + V`
//! restricted to them with Dirichlet conditions on unmasked neighbours.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use thiserror::Error;

use crate::field::{FieldError, Grid, ScalarField};
use crate::potential::DoubleWellPotential;
use crate::sparse::{nested_dissection, SymmetricCsr};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OperatorError {
    #[error("mask is empty")]
    EmptyMask,
    #[error("mask and field live on different grids")]
    GridMismatch,
    #[error("masks overlap at node {node}")]
    Overlap { node: usize },
    #[error(transparent)]
    Field(#[from] FieldError),
}

const OUTSIDE: usize = usize::MAX;

/// A set of grid nodes; the outer boundary ring is never included.
#[derive(Debug, Clone, PartialEq)]
pub struct SubdomainMask {
    grid: Grid,
    local: Vec<usize>,
    nodes: Vec<usize>,
}

impl SubdomainMask {
    pub fn from_predicate<F: FnMut(usize, usize) -> bool>(grid: Grid, mut keep: F) -> Self {
        let n = grid.n();
        let mut local = vec![OUTSIDE; grid.len()];
        let mut nodes = Vec::new();
        for j in 1..n.saturating_sub(1) {
            for i in 1..n - 1 {
                if keep(i, j) {
                    let id = grid.idx(i, j);
                    local[id] = nodes.len();
                    nodes.push(id);
                }
            }
        }
        Self { grid, local, nodes }
    }

    /// From a flag per grid node (ring flags are ignored).
    pub fn from_flags(grid: Grid, flags: &[bool]) -> Self {
        Self::from_predicate(grid, |i, j| flags[grid.idx(i, j)])
    }

    /// All nodes off the boundary ring.
    pub fn interior(grid: Grid) -> Self {
        Self::from_predicate(grid, |_, _| true)
    }

    /// Nodes with `|x| < radius`.
    pub fn disk(grid: Grid, radius: f64) -> Self {
        Self::from_predicate(grid, |i, j| grid.point(i, j).norm() < radius)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Grid indices of the masked nodes, in local order.
    pub fn nodes(&self) -> &[usize] {
        &self.nodes
    }

    pub fn contains(&self, idx: usize) -> bool {
        self.local[idx] != OUTSIDE
    }

    pub fn local_index(&self, idx: usize) -> Option<usize> {
        let l = self.local[idx];
        (l != OUTSIDE).then_some(l)
    }

    pub fn flags(&self) -> Vec<bool> {
        self.local.iter().map(|&l| l != OUTSIDE).collect()
    }

    /// Grid neighbours (4-connectivity) of a node.
    pub fn neighbours(grid: &Grid, idx: usize) -> impl Iterator<Item = usize> {
        let n = grid.n();
        let (i, j) = grid.ij(idx);
        let cand = [
            (i > 0).then(|| idx - 1),
            (i + 1 < n).then(|| idx + 1),
            (j > 0).then(|| idx - n),
            (j + 1 < n).then(|| idx + n),
        ];
        cand.into_iter().flatten()
    }

    /// Edge-connectedness of the masked node set.
    pub fn is_connected(&self) -> bool {
        if self.nodes.is_empty() {
            return true;
        }
        let mut seen = vec![false; self.nodes.len()];
        let mut queue = VecDeque::new();
        seen[0] = true;
        queue.push_back(self.nodes[0]);
        let mut count = 1;
        while let Some(p) = queue.pop_front() {
            for q in Self::neighbours(&self.grid, p) {
                if let Some(l) = self.local_index(q) {
                    if !seen[l] {
                        seen[l] = true;
                        count += 1;
                        queue.push_back(q);
                    }
                }
            }
        }
        count == self.nodes.len()
    }

    /// Grow the mask by `steps` layers of 4-neighbours (never into the ring).
    pub fn dilate(&self, steps: usize) -> Self {
        let mut flags = self.flags();
        for _ in 0..steps {
            let prev = flags.clone();
            for (idx, &f) in prev.iter().enumerate() {
                if f {
                    for q in Self::neighbours(&self.grid, idx) {
                        flags[q] = true;
                    }
                }
            }
        }
        Self::from_flags(self.grid, &flags)
    }

    pub fn is_subset_of(&self, other: &SubdomainMask) -> bool {
        self.grid == other.grid && self.nodes.iter().all(|&p| other.contains(p))
    }

    pub fn intersection(&self, other: &SubdomainMask) -> Self {
        Self::from_predicate(self.grid, |i, j| {
            let id = self.grid.idx(i, j);
            self.contains(id) && other.contains(id)
        })
    }

    /// Are two masks free of shared nodes and of coupling edges?
    pub fn is_decoupled_from(&self, other: &SubdomainMask) -> bool {
        self.nodes
            .iter()
            .all(|&p| !other.contains(p) && Self::neighbours(&self.grid, p).all(|q| !other.contains(q)))
    }

    /// The mask minus every node adjacent to `other`.
    pub fn without_neighbours_of(&self, other: &SubdomainMask) -> Self {
        Self::from_predicate(self.grid, |i, j| {
            let id = self.grid.idx(i, j);
            self.contains(id) && !other.contains(id) && Self::neighbours(&self.grid, id).all(|q| !other.contains(q))
        })
    }

    /// Strip from each part the nodes touching earlier parts, so the parts
    /// become pairwise decoupled.
    pub fn decouple(parts: &[SubdomainMask]) -> Vec<SubdomainMask> {
        let mut out: Vec<SubdomainMask> = Vec::with_capacity(parts.len());
        for part in parts {
            let mut p = part.clone();
            for earlier in &out {
                p = p.without_neighbours_of(earlier);
            }
            out.push(p);
        }
        out
    }

    /// Fill-reducing elimination order in local indices.
    pub fn ordering(&self) -> Vec<usize> {
        let coords: Vec<(i32, i32)> = self
            .nodes
            .iter()
            .map(|&p| {
                let (i, j) = self.grid.ij(p);
                (i as i32, j as i32)
            })
            .collect();
        nested_dissection(&coords)
    }

    /// Restrict a full-grid field to local order.
    pub fn gather(&self, f: &ScalarField) -> Vec<f64> {
        self.nodes.iter().map(|&p| f.values()[p]).collect()
    }

    /// Extend local values by zero to a full-grid field.
    pub fn scatter(&self, local: &[f64]) -> ScalarField {
        let mut out = ScalarField::zeros(self.grid);
        for (&p, &v) in self.nodes.iter().zip(local) {
            out.values_mut()[p] = v;
        }
        out
    }
}

/// `−Δ_h + diag(V)` on the nodes of a mask.
#[derive(Debug, Clone)]
pub struct SchrodingerOperator {
    mask: SubdomainMask,
    matrix: SymmetricCsr,
    potential_min: f64,
    potential_sup: f64,
}

impl SchrodingerOperator {
    /// Off-diagonal entries are exactly `−1/h²`; Dirichlet elsewhere.
    pub fn new(v: &ScalarField, mask: &SubdomainMask) -> Result<Self, OperatorError> {
        if mask.is_empty() {
            return Err(OperatorError::EmptyMask);
        }
        if v.grid() != mask.grid() {
            return Err(OperatorError::GridMismatch);
        }
        let grid = *mask.grid();
        let h = grid.h();
        let off = -1.0 / (h * h);
        let centre = 4.0 / (h * h);
        let mut trip = Vec::with_capacity(3 * mask.len());
        let mut vmin = f64::INFINITY;
        let mut vsup: f64 = 0.0;
        for (l, &p) in mask.nodes().iter().enumerate() {
            let vp = v.values()[p];
            vmin = vmin.min(vp);
            vsup = vsup.max(vp.abs());
            trip.push((l, l, centre + vp));
            let n = grid.n();
            for q in [p + 1, p + n] {
                if let Some(m) = mask.local_index(q) {
                    trip.push((l, m, off));
                }
            }
        }
        let matrix = SymmetricCsr::from_upper_triplets(mask.len(), &trip);
        Ok(Self { mask: mask.clone(), matrix, potential_min: vmin, potential_sup: vsup })
    }

    /// The Jacobi operator `−Δ_h + W″(u)` of a field.
    pub fn jacobi(u: &ScalarField, p: &DoubleWellPotential, mask: &SubdomainMask) -> Result<Self, OperatorError> {
        Self::new(&u.map(|t| p.ddw(t)), mask)
    }

    pub fn mask(&self) -> &SubdomainMask {
        &self.mask
    }

    pub fn matrix(&self) -> &SymmetricCsr {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn h(&self) -> f64 {
        self.mask.grid().h()
    }

    /// `min V` over the mask.
    pub fn potential_min(&self) -> f64 {
        self.potential_min
    }

    /// `max |V|` over the mask.
    pub fn potential_sup(&self) -> f64 {
        self.potential_sup
    }

    /// Default nullity window `10 h² ‖V‖∞`.
    pub fn default_null_window(&self) -> f64 {
        let h = self.h();
        10.0 * h * h * self.potential_sup.max(1.0)
    }

    /// `h² ζᵀ A ψ` with local vectors.
    pub fn quadratic_form(&self, zeta: &[f64], psi: &[f64]) -> f64 {
        let h = self.h();
        h * h * self.matrix.bilinear(zeta, psi)
    }

    /// `h² ζᵀ ζ`.
    pub fn norm_sq(&self, zeta: &[f64]) -> f64 {
        let h = self.h();
        h * h * zeta.iter().map(|z| z * z).sum::<f64>()
    }

    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.matrix.matvec(x, y);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decoupled_halves() {
        let g = Grid::centered(2.0, 0.5).unwrap();
        let left = SubdomainMask::from_predicate(g, |i, _| i <= 4);
        let right = SubdomainMask::from_predicate(g, |i, _| i > 4);
        assert!(!right.is_decoupled_from(&left));
        let parts = SubdomainMask::decouple(&[left.clone(), right]);
        assert_eq!(parts[0], left);
        assert!(parts[1].is_decoupled_from(&parts[0]));
        assert_eq!(parts[1].len(), 7 * 2);
    }

    #[test]
    fn disk_excludes_ring_and_is_connected() {
        let g = Grid::centered(2.0, 0.5).unwrap();
        let m = SubdomainMask::disk(g, 10.0);
        assert_eq!(m.len(), 7 * 7);
        assert!(m.is_connected());
        assert!(!m.contains(0));
    }

    #[test]
    fn constant_well_shifts_diagonal() {
        let g = Grid::centered(2.0, 0.5).unwrap();
        let m = SubdomainMask::interior(g);
        let a = SchrodingerOperator::jacobi(&ScalarField::constant(g, 1.0), &DoubleWellPotential::standard(), &m).unwrap();
        assert_eq!(a.matrix().get(0, 0), 16.0 + 2.0);
        assert_eq!(a.matrix().get(0, 1), -4.0);
        assert!(a.matrix().is_symmetric());
    }

    #[test]
    fn dilation_grows_by_layers() {
        let g = Grid::centered(5.0, 1.0).unwrap();
        let m = SubdomainMask::from_predicate(g, |i, j| i == 5 && j == 5);
        assert_eq!(m.dilate(1).len(), 5);
        assert_eq!(m.dilate(2).len(), 13);
        assert!(m.is_subset_of(&m.dilate(1)));
    }

    #[test]
    fn empty_mask_rejected() {
        let g = Grid::centered(2.0, 0.5).unwrap();
        let m = SubdomainMask::from_predicate(g, |_, _| false);
        assert!(matches!(SchrodingerOperator::new(&ScalarField::zeros(g), &m), Err(OperatorError::EmptyMask)));
    }
}
