#![allow(dead_code)]

use acmorse_core::field::{Grid, ScalarField};
use acmorse_core::operator::{SchrodingerOperator, SubdomainMask};
use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Ascending eigenvalues of the assembled matrix by a dense solver.
pub fn dense_eigenvalues(op: &SchrodingerOperator) -> Vec<f64> {
    let a = op.matrix();
    let n = a.dim();
    let m = DMatrix::from_row_slice(n, n, &a.to_dense());
    let mut vals: Vec<f64> = SymmetricEigen::new(m).eigenvalues.iter().copied().collect();
    vals.sort_by(f64::total_cmp);
    vals
}

pub fn dense_negative_count(op: &SchrodingerOperator) -> usize {
    dense_eigenvalues(op).iter().filter(|&&l| l < 0.0).count()
}

/// A random mask on a 22×22 grid (at most 400 nodes) and a random
/// potential with values in `[-bound, bound]`.
pub fn random_mask_problem(seed: u64, bound: f64) -> (ScalarField, SubdomainMask) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let grid = Grid::new(22, 0.25, 0.0).unwrap();
    let v = ScalarField::from_fn(grid, |_| rng.gen_range(-bound..bound));
    let density = rng.gen_range(0.3..1.0);
    let mut keep = vec![false; grid.len()];
    for k in keep.iter_mut() {
        *k = rng.gen_bool(density);
    }
    let mut mask = SubdomainMask::from_flags(grid, &keep);
    if mask.is_empty() {
        mask = SubdomainMask::interior(grid);
    }
    (v, mask)
}
