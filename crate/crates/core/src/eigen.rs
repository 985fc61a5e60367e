//! Lowest eigenpairs of sparse symmetric matrices: shift-invert Lanczos with
//! full reorthogonalization, deflation, and an inertia count certifying that
//! no eigenvalue below the reported ones was missed.

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::math::{hypot, sqrt};
use crate::sparse::{LdlFactor, SparseError, SymmetricCsr};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EigenError {
    #[error("tridiagonal QL iteration did not converge")]
    NoConvergence,
    #[error("requested {requested} eigenpairs from a matrix of dimension {dim}")]
    TooMany { requested: usize, dim: usize },
    #[error(transparent)]
    Sparse(#[from] SparseError),
}

/// Eigen-decomposition of the symmetric tridiagonal matrix with diagonal
/// `diag` and sub-diagonal `off` (implicit QL with Wilkinson shifts).
/// Returns ascending eigenvalues and the eigenvectors as columns of a
/// row-major `m × m` array.
pub fn tridiagonal_eigen(diag: &[f64], off: &[f64]) -> Result<(Vec<f64>, Vec<f64>), EigenError> {
    let n = diag.len();
    let mut d = diag.to_vec();
    let mut e = vec![0.0; n];
    e[..n.saturating_sub(1)].copy_from_slice(&off[..n.saturating_sub(1)]);
    let mut z = vec![0.0; n * n];
    for i in 0..n {
        z[i * n + i] = 1.0;
    }
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                return Err(EigenError::NoConvergence);
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = hypot(g, 1.0);
            g = d[m] - d[l] + e[l] / (g + if g >= 0.0 { r } else { -r });
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut underflow = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = hypot(f, g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                for k in 0..n {
                    let t = z[k * n + i + 1];
                    z[k * n + i + 1] = s * z[k * n + i] + c * t;
                    z[k * n + i] = c * z[k * n + i] - s * t;
                }
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| d[a].total_cmp(&d[b]));
    let vals = idx.iter().map(|&i| d[i]).collect();
    let mut vecs = vec![0.0; n * n];
    for (new, &old) in idx.iter().enumerate() {
        for k in 0..n {
            vecs[k * n + new] = z[k * n + old];
        }
    }
    Ok((vals, vecs))
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenPair {
    pub value: f64,
    /// `‖A x − λ x‖₂` with `‖x‖₂ = 1`.
    pub residual: f64,
    pub vector: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LanczosSettings {
    /// Residual target for each pair.
    pub tol: f64,
    /// Krylov basis size per run.
    pub max_basis: usize,
    /// Deflated restarts before giving up on certification.
    pub max_rounds: usize,
    pub seed: u64,
}

impl Default for LanczosSettings {
    fn default() -> Self {
        Self { tol: 1e-8, max_basis: 240, max_rounds: 8, seed: 0x1a2c }
    }
}

/// Result of [`lowest_eigenpairs`].
#[derive(Debug, Clone, PartialEq)]
pub struct LowestSpectrum {
    pub pairs: Vec<EigenPair>,
    /// Inertia confirmed that exactly `pairs.len()` eigenvalues lie at or
    /// below the largest reported one.
    pub certified: bool,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn orthogonalize(w: &mut [f64], basis: &[Vec<f64>]) {
    for _ in 0..2 {
        for q in basis {
            let c = dot(w, q);
            for (wi, qi) in w.iter_mut().zip(q) {
                *wi -= c * qi;
            }
        }
    }
}

/// The `nev` smallest eigenpairs of `a`, given a lower bound `floor` for its
/// spectrum (used to place the shift so that `A − σI` is positive definite).
pub fn lowest_eigenpairs(
    a: &SymmetricCsr,
    order: &[usize],
    floor: f64,
    nev: usize,
    settings: LanczosSettings,
) -> Result<LowestSpectrum, EigenError> {
    let n = a.dim();
    if nev > n {
        return Err(EigenError::TooMany { requested: nev, dim: n });
    }
    if nev == 0 {
        return Ok(LowestSpectrum { pairs: Vec::new(), certified: true });
    }
    let sigma = floor - 0.1 * floor.abs().max(1.0);
    let factor = LdlFactor::new(a, order, -sigma, 0.0)?;
    let mut rng = ChaCha8Rng::seed_from_u64(settings.seed);
    let mut found: Vec<EigenPair> = Vec::new();

    for _ in 0..settings.max_rounds {
        let locked: Vec<Vec<f64>> = found.iter().map(|p| p.vector.clone()).collect();
        let want = (nev + 2).saturating_sub(found.len()).max(2).min(n - found.len());
        if want == 0 {
            break;
        }
        let start: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() - 0.5).collect();
        let new = lanczos_run(a, &factor, &locked, start, want, settings)?;
        found.extend(new.into_iter().filter(|p| p.residual <= settings.tol));
        found.sort_by(|x, y| x.value.total_cmp(&y.value));
        if found.len() >= nev && certify(a, order, &found, nev)? {
            found.truncate(nev);
            return Ok(LowestSpectrum { pairs: found, certified: true });
        }
        if found.len() >= n {
            break;
        }
    }
    found.truncate(nev);
    Ok(LowestSpectrum { pairs: found, certified: false })
}

/// Does the inertia below the `nev`-th value match the number found there?
fn certify(a: &SymmetricCsr, order: &[usize], found: &[EigenPair], nev: usize) -> Result<bool, EigenError> {
    let top = found[nev - 1].value;
    let next = found.get(nev).map(|p| p.value);
    let margin = 1e-9 * top.abs().max(1.0);
    let mut tau = match next {
        Some(v) if v - top < 2.0 * margin => 0.5 * (top + v),
        _ => top + margin,
    };
    for _ in 0..4 {
        match LdlFactor::new(a, order, -tau, 0.0) {
            Ok(f) => {
                let below = found.iter().filter(|p| p.value < tau).count();
                return Ok(f.inertia().negative == below);
            }
            Err(SparseError::SingularPivot { .. }) => tau += margin,
            Err(e) => return Err(e.into()),
        }
    }
    Ok(false)
}

fn lanczos_run(
    a: &SymmetricCsr,
    factor: &LdlFactor,
    locked: &[Vec<f64>],
    mut start: Vec<f64>,
    want: usize,
    settings: LanczosSettings,
) -> Result<Vec<EigenPair>, EigenError> {
    let n = a.dim();
    let room = n - locked.len();
    let max_basis = settings.max_basis.min(room).max(1);
    orthogonalize(&mut start, locked);
    let nrm = sqrt(dot(&start, &start));
    for x in start.iter_mut() {
        *x /= nrm;
    }
    let mut q: Vec<Vec<f64>> = vec![start];
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut w = vec![0.0; n];
    let mut result = Vec::new();

    for j in 0..max_basis {
        w.copy_from_slice(&q[j]);
        factor.solve_in_place(&mut w)?;
        let aj = dot(&w, &q[j]);
        for (wi, qi) in w.iter_mut().zip(&q[j]) {
            *wi -= aj * qi;
        }
        if j > 0 {
            for (wi, qi) in w.iter_mut().zip(&q[j - 1]) {
                *wi -= beta[j - 1] * qi;
            }
        }
        orthogonalize(&mut w, locked);
        orthogonalize(&mut w, &q);
        alpha.push(aj);
        let bj = sqrt(dot(&w, &w));
        let exhausted = bj <= 1e-13 * aj.abs().max(1e-300) || j + 1 == max_basis;
        let m = j + 1;
        if m >= want && (m % 10 == 0 || exhausted) {
            let pairs = ritz_pairs(a, &q, &alpha, &beta, want.min(m))?;
            let done = pairs.iter().all(|p| p.residual <= settings.tol);
            if done || exhausted {
                result = pairs;
                break;
            }
        }
        if exhausted {
            break;
        }
        beta.push(bj);
        q.push(w.iter().map(|x| x / bj).collect());
    }
    Ok(result)
}

fn ritz_pairs(
    a: &SymmetricCsr,
    q: &[Vec<f64>],
    alpha: &[f64],
    beta: &[f64],
    want: usize,
) -> Result<Vec<EigenPair>, EigenError> {
    let m = alpha.len();
    let n = a.dim();
    let (theta, s) = tridiagonal_eigen(alpha, &beta[..m - 1])?;
    let mut out = Vec::with_capacity(want);
    let mut ax = vec![0.0; n];
    for col in (0..m).rev().take(want) {
        if theta[col] <= 0.0 {
            continue;
        }
        let mut x = vec![0.0; n];
        for (row, qv) in q.iter().take(m).enumerate() {
            let c = s[row * m + col];
            for (xi, qi) in x.iter_mut().zip(qv) {
                *xi += c * qi;
            }
        }
        let nrm = sqrt(dot(&x, &x));
        for xi in x.iter_mut() {
            *xi /= nrm;
        }
        a.matvec(&x, &mut ax);
        let value = dot(&x, &ax);
        let residual = sqrt(ax.iter().zip(&x).map(|(u, v)| (u - value * v) * (u - value * v)).sum::<f64>());
        out.push(EigenPair { value, residual, vector: x });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tridiagonal_matches_closed_form() {
        // tridiag(-1, 2, -1) of size m: 2 - 2 cos(jπ/(m+1))
        let m = 9;
        let (vals, vecs) = tridiagonal_eigen(&[2.0; 9], &[-1.0; 8]).unwrap();
        for (j, v) in vals.iter().enumerate() {
            let exact = 2.0 - 2.0 * crate::math::cos((j + 1) as f64 * core::f64::consts::PI / (m + 1) as f64);
            assert!((v - exact).abs() < 1e-13);
        }
        // columns orthonormal
        for a in 0..m {
            for b in 0..m {
                let d: f64 = (0..m).map(|k| vecs[k * m + a] * vecs[k * m + b]).sum();
                assert!((d - if a == b { 1.0 } else { 0.0 }).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn lowest_of_path_laplacian() {
        let n = 60;
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.0));
            if i + 1 < n {
                t.push((i, i + 1, -1.0));
            }
        }
        let a = SymmetricCsr::from_upper_triplets(n, &t);
        let order: Vec<usize> = (0..n).collect();
        let spec = lowest_eigenpairs(&a, &order, 0.0, 4, LanczosSettings::default()).unwrap();
        assert!(spec.certified);
        for (j, p) in spec.pairs.iter().enumerate() {
            let exact = 2.0 - 2.0 * crate::math::cos((j + 1) as f64 * core::f64::consts::PI / (n + 1) as f64);
            assert!((p.value - exact).abs() < 1e-12, "{} vs {}", p.value, exact);
            assert!(p.residual <= 1e-8);
        }
    }

    #[test]
    fn degenerate_pairs_are_not_missed() {
        // 2-D grid Laplacian on a square has doubly degenerate eigenvalues
        let side = 12;
        let n = side * side;
        let mut t = Vec::new();
        for y in 0..side {
            for x in 0..side {
                let p = y * side + x;
                t.push((p, p, 4.0));
                if x + 1 < side {
                    t.push((p, p + 1, -1.0));
                }
                if y + 1 < side {
                    t.push((p, p + side, -1.0));
                }
            }
        }
        let a = SymmetricCsr::from_upper_triplets(n, &t);
        let order: Vec<usize> = (0..n).collect();
        let spec = lowest_eigenpairs(&a, &order, 0.0, 3, LanczosSettings::default()).unwrap();
        assert!(spec.certified);
        let mu = |k: usize| 2.0 - 2.0 * crate::math::cos(k as f64 * core::f64::consts::PI / (side + 1) as f64);
        let expect = [2.0 * mu(1), mu(1) + mu(2), mu(1) + mu(2)];
        for (p, e) in spec.pairs.iter().zip(expect) {
            assert!((p.value - e).abs() < 1e-11, "{} vs {}", p.value, e);
        }
    }
}
