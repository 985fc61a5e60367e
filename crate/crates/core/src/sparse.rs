//! Sparse symmetric matrices and an `LDLᵀ` factorization without pivoting.
//!
//! The factorization follows the up-looking elimination-tree scheme of QDLDL.
//! Its pivots give the inertia of the matrix (Sylvester's law), which is how
//! Morse indices are counted. Fill is controlled by a geometric nested
//! dissection ordering for matrices that live on grid nodes.

use alloc::vec;
use alloc::vec::Vec;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SparseError {
    #[error("zero (or negligible) pivot {pivot} at elimination step {step}")]
    SingularPivot { step: usize, pivot: f64 },
    #[error("permutation of length {got} does not match dimension {expected}")]
    BadPermutation { expected: usize, got: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
}

/// Symmetric matrix in CSR form storing both triangles.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricCsr {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    vals: Vec<f64>,
}

impl SymmetricCsr {
    /// Build from upper-triangle triplets `(i, j, v)` with `i <= j`;
    /// duplicates are summed and each off-diagonal entry is mirrored.
    pub fn from_upper_triplets(n: usize, triplets: &[(usize, usize, f64)]) -> Self {
        let mut counts = vec![0usize; n + 1];
        for &(i, j, _) in triplets {
            counts[i + 1] += 1;
            if i != j {
                counts[j + 1] += 1;
            }
        }
        for r in 0..n {
            counts[r + 1] += counts[r];
        }
        let nnz = counts[n];
        let mut next = counts.clone();
        let mut cols = vec![0usize; nnz];
        let mut vals = vec![0.0; nnz];
        for &(i, j, v) in triplets {
            let (a, b) = if i <= j { (i, j) } else { (j, i) };
            cols[next[a]] = b;
            vals[next[a]] = v;
            next[a] += 1;
            if a != b {
                cols[next[b]] = a;
                vals[next[b]] = v;
                next[b] += 1;
            }
        }
        // sort each row and merge duplicates
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col_idx = Vec::with_capacity(nnz);
        let mut out_vals = Vec::with_capacity(nnz);
        row_ptr.push(0);
        let mut row: Vec<(usize, f64)> = Vec::new();
        for r in 0..n {
            row.clear();
            row.extend((counts[r]..counts[r + 1]).map(|p| (cols[p], vals[p])));
            row.sort_by_key(|e| e.0);
            let mut last = usize::MAX;
            for &(c, v) in &row {
                if c == last {
                    *out_vals.last_mut().unwrap() += v;
                } else {
                    col_idx.push(c);
                    out_vals.push(v);
                    last = c;
                }
            }
            row_ptr.push(col_idx.len());
        }
        Self { n, row_ptr, col_idx, vals: out_vals }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    /// `(column, value)` pairs of row `r`.
    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        (self.row_ptr[r]..self.row_ptr[r + 1]).map(move |p| (self.col_idx[p], self.vals[p]))
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.row(i).find(|e| e.0 == j).map_or(0.0, |e| e.1)
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        for (r, yr) in y.iter_mut().enumerate().take(self.n) {
            let mut s = 0.0;
            for p in self.row_ptr[r]..self.row_ptr[r + 1] {
                s += self.vals[p] * x[self.col_idx[p]];
            }
            *yr = s;
        }
    }

    /// `xᵀ A y`.
    pub fn bilinear(&self, x: &[f64], y: &[f64]) -> f64 {
        let mut total = 0.0;
        for r in 0..self.n {
            let mut s = 0.0;
            for p in self.row_ptr[r]..self.row_ptr[r + 1] {
                s += self.vals[p] * y[self.col_idx[p]];
            }
            total += x[r] * s;
        }
        total
    }

    /// `max |a_ij|` over the diagonal.
    pub fn max_abs_diagonal(&self) -> f64 {
        self.diagonal().iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Row-major dense copy (for small checks).
    pub fn to_dense(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.n * self.n];
        for r in 0..self.n {
            for (c, v) in self.row(r) {
                d[r * self.n + c] = v;
            }
        }
        d
    }

    /// Exact symmetry check on the stored pattern and values.
    pub fn is_symmetric(&self) -> bool {
        (0..self.n).all(|r| self.row(r).all(|(c, v)| self.get(c, r).to_bits() == v.to_bits()))
    }
}

/// Counts of negative, zero and positive pivots.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Inertia {
    pub negative: usize,
    pub zero: usize,
    pub positive: usize,
}

const NONE: usize = usize::MAX;

/// `P (A + shift I) Pᵀ = L D Lᵀ` with unit lower-triangular `L`.
#[derive(Debug, Clone)]
pub struct LdlFactor {
    perm: Vec<usize>,
    iperm: Vec<usize>,
    lp: Vec<usize>,
    li: Vec<usize>,
    lx: Vec<f64>,
    d: Vec<f64>,
}

impl LdlFactor {
    /// Factor `A + shift I` under the ordering `perm` (`perm[new] = old`).
    /// Pivots with `|d| <= pivot_tol` are reported as singular.
    pub fn new(a: &SymmetricCsr, perm: &[usize], shift: f64, pivot_tol: f64) -> Result<Self, SparseError> {
        let n = a.dim();
        if perm.len() != n {
            return Err(SparseError::BadPermutation { expected: n, got: perm.len() });
        }
        let mut iperm = vec![NONE; n];
        for (new, &old) in perm.iter().enumerate() {
            if old >= n || iperm[old] != NONE {
                return Err(SparseError::BadPermutation { expected: n, got: perm.len() });
            }
            iperm[old] = new;
        }

        // upper triangle of the permuted matrix, CSC
        let mut colcount = vec![0usize; n + 1];
        for old_r in 0..n {
            let nr = iperm[old_r];
            for (old_c, _) in a.row(old_r) {
                let nc = iperm[old_c];
                if nr <= nc {
                    colcount[nc + 1] += 1;
                }
            }
        }
        for c in 0..n {
            colcount[c + 1] += colcount[c];
        }
        let ap = colcount.clone();
        let mut fill = colcount;
        let mut ai = vec![0usize; ap[n]];
        let mut ax = vec![0.0; ap[n]];
        for old_r in 0..n {
            let nr = iperm[old_r];
            for (old_c, v) in a.row(old_r) {
                let nc = iperm[old_c];
                if nr <= nc {
                    let p = fill[nc];
                    ai[p] = nr;
                    ax[p] = if nr == nc { v + shift } else { v };
                    fill[nc] += 1;
                }
            }
        }

        // elimination tree and column counts of L
        let mut etree = vec![NONE; n];
        let mut lnz = vec![0usize; n];
        let mut work = vec![NONE; n];
        for j in 0..n {
            work[j] = j;
            for p in ap[j]..ap[j + 1] {
                let mut i = ai[p];
                while i != j && work[i] != j {
                    if etree[i] == NONE {
                        etree[i] = j;
                    }
                    lnz[i] += 1;
                    work[i] = j;
                    i = etree[i];
                }
            }
        }
        let mut lp = vec![0usize; n + 1];
        for i in 0..n {
            lp[i + 1] = lp[i] + lnz[i];
        }
        let total = lp[n];
        let mut li = vec![0usize; total];
        let mut lx = vec![0.0; total];
        let mut d = vec![0.0; n];
        let mut dinv = vec![0.0; n];

        let mut y_vals = vec![0.0; n];
        let mut y_used = vec![false; n];
        let mut y_idx = vec![0usize; n];
        let mut elim = vec![0usize; n];
        let mut next_space: Vec<usize> = lp[..n].to_vec();

        for k in 0..n {
            let mut nnz_y = 0;
            d[k] = 0.0;
            for p in ap[k]..ap[k + 1] {
                let b = ai[p];
                if b == k {
                    d[k] = ax[p];
                    continue;
                }
                y_vals[b] = ax[p];
                if !y_used[b] {
                    y_used[b] = true;
                    elim[0] = b;
                    let mut ne = 1;
                    let mut nx = etree[b];
                    while nx != NONE && nx < k {
                        if y_used[nx] {
                            break;
                        }
                        y_used[nx] = true;
                        elim[ne] = nx;
                        ne += 1;
                        nx = etree[nx];
                    }
                    while ne > 0 {
                        ne -= 1;
                        y_idx[nnz_y] = elim[ne];
                        nnz_y += 1;
                    }
                }
            }
            for t in (0..nnz_y).rev() {
                let c = y_idx[t];
                let slot = next_space[c];
                let yc = y_vals[c];
                for q in lp[c]..slot {
                    y_vals[li[q]] -= lx[q] * yc;
                }
                li[slot] = k;
                let l = yc * dinv[c];
                lx[slot] = l;
                d[k] -= yc * l;
                next_space[c] += 1;
                y_vals[c] = 0.0;
                y_used[c] = false;
            }
            if !(d[k].abs() > pivot_tol) {
                return Err(SparseError::SingularPivot { step: k, pivot: d[k] });
            }
            dinv[k] = 1.0 / d[k];
        }
        Ok(Self { perm: perm.to_vec(), iperm, lp, li, lx, d })
    }

    pub fn dim(&self) -> usize {
        self.d.len()
    }

    pub fn nnz_l(&self) -> usize {
        self.lx.len()
    }

    pub fn pivots(&self) -> &[f64] {
        &self.d
    }

    pub fn inertia(&self) -> Inertia {
        let mut i = Inertia::default();
        for &v in &self.d {
            if v < 0.0 {
                i.negative += 1;
            } else if v > 0.0 {
                i.positive += 1;
            } else {
                i.zero += 1;
            }
        }
        i
    }

    /// Solve `(A + shift I) x = b` in place.
    pub fn solve_in_place(&self, b: &mut [f64]) -> Result<(), SparseError> {
        let n = self.dim();
        if b.len() != n {
            return Err(SparseError::Dimension { expected: n, got: b.len() });
        }
        let mut x: Vec<f64> = self.perm.iter().map(|&o| b[o]).collect();
        for i in 0..n {
            let xi = x[i];
            for q in self.lp[i]..self.lp[i + 1] {
                x[self.li[q]] -= self.lx[q] * xi;
            }
        }
        for (xi, di) in x.iter_mut().zip(&self.d) {
            *xi /= di;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for q in self.lp[i]..self.lp[i + 1] {
                s -= self.lx[q] * x[self.li[q]];
            }
            x[i] = s;
        }
        for (old, &new) in self.iperm.iter().enumerate() {
            b[old] = x[new];
        }
        Ok(())
    }
}

/// Geometric nested dissection for unknowns sitting on integer grid
/// coordinates with 4-neighbour coupling. Returns `perm[new] = old`.
pub fn nested_dissection(coords: &[(i32, i32)]) -> Vec<usize> {
    let mut order = Vec::with_capacity(coords.len());
    let mut idx: Vec<usize> = (0..coords.len()).collect();
    dissect(coords, &mut idx, &mut order);
    order
}

const LEAF: usize = 48;

fn dissect(coords: &[(i32, i32)], idx: &mut [usize], out: &mut Vec<usize>) {
    if idx.len() <= LEAF {
        idx.sort_by_key(|&k| (coords[k].1, coords[k].0));
        out.extend_from_slice(idx);
        return;
    }
    let (mut x0, mut x1, mut y0, mut y1) = (i32::MAX, i32::MIN, i32::MAX, i32::MIN);
    for &k in idx.iter() {
        let (x, y) = coords[k];
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    let split_x = x1 - x0 >= y1 - y0;
    let key = |k: usize| if split_x { coords[k].0 } else { coords[k].1 };
    let other = |k: usize| if split_x { coords[k].1 } else { coords[k].0 };
    let (lo, hi) = if split_x { (x0, x1) } else { (y0, y1) };
    if lo == hi {
        // a single line of nodes: bisect it along the other axis
        idx.sort_by_key(|&k| other(k));
        let mid = idx.len() / 2;
        let (left, rest) = idx.split_at_mut(mid);
        let (sep, right) = rest.split_at_mut(1);
        dissect(coords, left, out);
        dissect(coords, right, out);
        out.push(sep[0]);
        return;
    }
    // median coordinate as the cut line
    let mut keys: Vec<i32> = idx.iter().map(|&k| key(k)).collect();
    let mid = keys.len() / 2;
    keys.select_nth_unstable(mid);
    let cut = keys[mid];
    let mut left = Vec::new();
    let mut right = Vec::new();
    let mut sep = Vec::new();
    for &k in idx.iter() {
        match key(k).cmp(&cut) {
            core::cmp::Ordering::Less => left.push(k),
            core::cmp::Ordering::Greater => right.push(k),
            core::cmp::Ordering::Equal => sep.push(k),
        }
    }
    dissect(coords, &mut left, out);
    dissect(coords, &mut right, out);
    sep.sort_by_key(|&k| other(k));
    out.extend_from_slice(&sep);
}
