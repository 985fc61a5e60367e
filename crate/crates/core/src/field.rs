//! Uniform square grids and scalar fields sampled on them.

use alloc::vec;
use alloc::vec::Vec;

use thiserror::Error;

use crate::geometry::Vec2;
use crate::math::round;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FieldError {
    #[error("grid needs h > 0 and at least 3 points per side (n = {n}, h = {h})")]
    BadGrid { n: usize, h: f64 },
    #[error("value count {got} does not match n^2 = {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("non-finite value at node ({i}, {j})")]
    NonFinite { i: usize, j: usize },
    #[error("fields live on different grids")]
    GridMismatch,
}

/// `n × n` nodes with spacing `h`; node `(i, j)` sits at
/// `(origin + i h, origin + j h)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    n: usize,
    h: f64,
    origin: f64,
}

impl Grid {
    pub fn new(n: usize, h: f64, origin: f64) -> Result<Self, FieldError> {
        if n < 3 || !(h > 0.0) || !h.is_finite() || !origin.is_finite() {
            return Err(FieldError::BadGrid { n, h });
        }
        Ok(Self { n, h, origin })
    }

    /// Centered grid covering `[-half_width, half_width]^2`.
    pub fn centered(half_width: f64, h: f64) -> Result<Self, FieldError> {
        if !(h > 0.0) || !(half_width > 0.0) {
            return Err(FieldError::BadGrid { n: 0, h });
        }
        let cells = round(2.0 * half_width / h) as usize;
        let n = cells + 1;
        Self::new(n, h, -0.5 * cells as f64 * h)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn origin(&self) -> f64 {
        self.origin
    }

    pub fn half_width(&self) -> f64 {
        0.5 * (self.n - 1) as f64 * self.h
    }

    pub fn len(&self) -> usize {
        self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn coord(&self, i: usize) -> f64 {
        self.origin + i as f64 * self.h
    }

    #[inline]
    pub fn point(&self, i: usize, j: usize) -> Vec2 {
        Vec2::new(self.coord(i), self.coord(j))
    }

    /// Row-major index (rows are `j`, the `y` index).
    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        j * self.n + i
    }

    #[inline]
    pub fn ij(&self, idx: usize) -> (usize, usize) {
        (idx % self.n, idx / self.n)
    }

    #[inline]
    pub fn is_boundary(&self, i: usize, j: usize) -> bool {
        i == 0 || j == 0 || i + 1 == self.n || j + 1 == self.n
    }

    /// Nearest node index along one axis, clamped to the grid.
    pub fn nearest(&self, x: f64) -> usize {
        let k = round((x - self.origin) / self.h);
        if k <= 0.0 {
            0
        } else {
            (k as usize).min(self.n - 1)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: Grid,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn zeros(grid: Grid) -> Self {
        Self { grid, values: vec![0.0; grid.len()] }
    }

    pub fn constant(grid: Grid, c: f64) -> Self {
        Self { grid, values: vec![c; grid.len()] }
    }

    pub fn from_values(grid: Grid, values: Vec<f64>) -> Result<Self, FieldError> {
        if values.len() != grid.len() {
            return Err(FieldError::LengthMismatch { expected: grid.len(), got: values.len() });
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            let (i, j) = grid.ij(k);
            return Err(FieldError::NonFinite { i, j });
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn<F: FnMut(Vec2) -> f64>(grid: Grid, mut f: F) -> Self {
        let mut values = Vec::with_capacity(grid.len());
        for j in 0..grid.n() {
            for i in 0..grid.n() {
                values.push(f(grid.point(i, j)));
            }
        }
        Self { grid, values }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.idx(i, j)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let k = self.grid.idx(i, j);
        self.values[k] = v;
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn map<F: Fn(f64) -> f64>(&self, f: F) -> Self {
        Self { grid: self.grid, values: self.values.iter().map(|&v| f(v)).collect() }
    }

    /// Pointwise `self - other`.
    pub fn difference(&self, other: &ScalarField) -> Result<Self, FieldError> {
        if self.grid != other.grid {
            return Err(FieldError::GridMismatch);
        }
        Ok(Self {
            grid: self.grid,
            values: self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect(),
        })
    }

    /// Sup-norm distance restricted to nodes with `|x| <= radius`.
    pub fn sup_distance_within(&self, other: &ScalarField, radius: f64) -> Result<f64, FieldError> {
        if self.grid != other.grid {
            return Err(FieldError::GridMismatch);
        }
        let g = self.grid;
        let mut m = 0.0f64;
        for j in 0..g.n() {
            for i in 0..g.n() {
                if g.point(i, j).norm() <= radius {
                    let k = g.idx(i, j);
                    m = m.max((self.values[k] - other.values[k]).abs());
                }
            }
        }
        Ok(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn centered_grid_has_node_at_origin() {
        let g = Grid::centered(20.0, 0.1).unwrap();
        assert_eq!(g.n(), 401);
        assert!((g.half_width() - 20.0).abs() < 1e-12);
        let c = g.nearest(0.0);
        assert_eq!(g.coord(c), 0.0);
    }

    #[test]
    fn non_finite_rejected() {
        let g = Grid::centered(1.0, 0.5).unwrap();
        let mut v = vec![0.0; g.len()];
        v[7] = f64::NAN;
        assert_eq!(ScalarField::from_values(g, v).unwrap_err(), FieldError::NonFinite { i: 2, j: 1 });
    }
}
