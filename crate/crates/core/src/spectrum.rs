//! Dirichlet spectra of Schrödinger operators `−Δ_h + V` on grid subdomains:
//! exact discrete Morse index by inertia, lowest eigenvalues by Lanczos, and
//! the checks built on them (eigenvalue floor, domain monotonicity,
//! Courant-type additivity, instability past a nodal domain, logarithmic
//! cutoffs).

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

pub use crate::operator::{OperatorError, SchrodingerOperator, SubdomainMask};

use crate::eigen::{lowest_eigenpairs, EigenError, EigenPair, LanczosSettings};
use crate::field::{FieldError, ScalarField};
use crate::math::{ln, sqrt};
use crate::potential::DoubleWellPotential;
use crate::sparse::{LdlFactor, SparseError, SymmetricCsr};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpectrumError {
    #[error(transparent)]
    Operator(#[from] OperatorError),
    #[error(transparent)]
    Eigen(#[from] EigenError),
    #[error(transparent)]
    Sparse(#[from] SparseError),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("Rayleigh quotient of the zero vector")]
    ZeroVector,
    #[error("vector length {got} does not match operator dimension {expected}")]
    Dimension { expected: usize, got: usize },
    #[error("radii must be positive and strictly increasing")]
    BadRadii,
    #[error("precondition failed: {0}")]
    Precondition(&'static str),
}

/// `−Δ_h + W″(u)` on a mask.
pub fn assemble(u: &ScalarField, p: &DoubleWellPotential, mask: &SubdomainMask) -> Result<SchrodingerOperator, SpectrumError> {
    Ok(SchrodingerOperator::jacobi(u, p, mask)?)
}

/// One-dimensional analogue: `−u″ + V u` on `v.len()` interior points.
pub fn path_operator(v: &[f64], h: f64) -> SymmetricCsr {
    let inv = 1.0 / (h * h);
    let mut t = Vec::with_capacity(2 * v.len());
    for (i, vi) in v.iter().enumerate() {
        t.push((i, i, 2.0 * inv + vi));
        if i + 1 < v.len() {
            t.push((i, i + 1, -inv));
        }
    }
    SymmetricCsr::from_upper_triplets(v.len(), &t)
}

/// `Q(ζ, ψ) = h² ζᵀ A ψ` for vectors in the mask's local order.
pub fn quadratic_form(op: &SchrodingerOperator, zeta: &[f64], psi: &[f64]) -> Result<f64, SpectrumError> {
    for x in [zeta, psi] {
        if x.len() != op.dim() {
            return Err(SpectrumError::Dimension { expected: op.dim(), got: x.len() });
        }
    }
    Ok(op.quadratic_form(zeta, psi))
}

/// `Q(ζ, ζ) / ‖ζ‖²`.
pub fn rayleigh(op: &SchrodingerOperator, zeta: &[f64]) -> Result<f64, SpectrumError> {
    let q = quadratic_form(op, zeta, zeta)?;
    let n = op.norm_sq(zeta);
    if n == 0.0 {
        return Err(SpectrumError::ZeroVector);
    }
    Ok(q / n)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IndexSettings {
    /// Half-width of the nullity window; `None` uses `10 h² ‖V‖∞`.
    pub null_window: Option<f64>,
    /// How many of the lowest eigenpairs to extract (0 for inertia only).
    pub eigenpairs: usize,
    pub lanczos: LanczosSettings,
}

impl Default for IndexSettings {
    fn default() -> Self {
        Self { null_window: None, eigenpairs: 4, lanczos: LanczosSettings::default() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralReport {
    pub radius: Option<f64>,
    /// Negative eigenvalue count from the pivots of `A = LDLᵀ`.
    pub index: usize,
    /// Eigenvalues in `(−ε, ε)`, from the inertia of `A ∓ εI`.
    pub nullity_estimate: usize,
    pub null_window: f64,
    /// `(neg(A + εI), neg(A − εI))` when `A` itself had a zero pivot.
    pub singular_retry: Option<(usize, usize)>,
    /// `(λ, ‖Ax − λx‖)` ascending.
    pub lowest_eigenvalues: Vec<(f64, f64)>,
    /// Inertia confirmed no eigenvalue below the reported ones was missed.
    pub eigenvalues_certified: bool,
    pub dimension: usize,
}

impl SpectralReport {
    /// Reported eigenvalues below `−ε`.
    pub fn negative_eigenvalue_count(&self) -> usize {
        self.lowest_eigenvalues.iter().filter(|e| e.0 < -self.null_window).count()
    }
}

fn negative_count(a: &SymmetricCsr, order: &[usize], shift: f64) -> Result<usize, SparseError> {
    Ok(LdlFactor::new(a, order, shift, 0.0)?.inertia().negative)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InertiaCounts {
    pub index: usize,
    /// Eigenvalues in `(−ε, ε)`.
    pub nullity: usize,
    /// `(neg(A + εI), neg(A − εI))` when `A` itself had a zero pivot.
    pub singular_retry: Option<(usize, usize)>,
}

/// Negative count of `a` and the eigenvalue count in `(−ε, ε)` from the
/// pivots of `A`, `A + εI` and `A − εI`.
pub fn inertia_counts(a: &SymmetricCsr, order: &[usize], eps: f64) -> Result<InertiaCounts, SpectrumError> {
    let below_minus = negative_count(a, order, eps)?;
    let below_plus = negative_count(a, order, -eps)?;
    let (index, singular_retry) = match negative_count(a, order, 0.0) {
        Ok(n) => (n, None),
        Err(SparseError::SingularPivot { .. }) => (below_minus, Some((below_minus, below_plus))),
        Err(e) => return Err(e.into()),
    };
    Ok(InertiaCounts { index, nullity: below_plus - below_minus, singular_retry })
}

/// Discrete Morse index and nullity estimate by inertia, with optional
/// lowest eigenpairs.
pub fn morse_index(op: &SchrodingerOperator, settings: IndexSettings) -> Result<SpectralReport, SpectrumError> {
    morse_index_with_vectors(op, settings).map(|r| r.0)
}

/// [`morse_index`] also returning the computed eigenvectors (local order).
pub fn morse_index_with_vectors(op: &SchrodingerOperator, settings: IndexSettings) -> Result<(SpectralReport, Vec<EigenPair>), SpectrumError> {
    let a = op.matrix();
    let order = op.mask().ordering();
    let eps = settings.null_window.unwrap_or_else(|| op.default_null_window());
    let counts = inertia_counts(a, &order, eps)?;
    let (pairs, certified) = if settings.eigenpairs > 0 {
        let nev = settings.eigenpairs.min(op.dim());
        let spec = lowest_eigenpairs(a, &order, op.potential_min().min(0.0), nev, settings.lanczos)?;
        (spec.pairs, spec.certified)
    } else {
        (Vec::new(), true)
    };
    let report = SpectralReport {
        radius: None,
        index: counts.index,
        nullity_estimate: counts.nullity,
        null_window: eps,
        singular_retry: counts.singular_retry,
        lowest_eigenvalues: pairs.iter().map(|p| (p.value, p.residual)).collect(),
        eigenvalues_certified: certified,
        dimension: op.dim(),
    };
    Ok((report, pairs))
}

#[derive(Debug, Clone, PartialEq)]
pub struct IndexProfile {
    pub reports: Vec<SpectralReport>,
    /// Index nondecreasing with the radius.
    pub index_monotone: bool,
    /// Each tracked eigenvalue nonincreasing with the radius (slack `1e-10`).
    pub eigenvalues_monotone: bool,
    /// Index when it agrees over the two largest radii.
    pub estimated_index: Option<usize>,
}

pub const MONOTONE_SLACK: f64 = 1e-10;

/// Spectral reports over nested disks `B_R`.
pub fn index_profile(u: &ScalarField, p: &DoubleWellPotential, radii: &[f64], settings: IndexSettings) -> Result<IndexProfile, SpectrumError> {
    if radii.is_empty() || radii[0] <= 0.0 || radii.windows(2).any(|w| w[1] <= w[0]) {
        return Err(SpectrumError::BadRadii);
    }
    let mut reports = Vec::with_capacity(radii.len());
    for &r in radii {
        let mask = SubdomainMask::disk(*u.grid(), r);
        let op = assemble(u, p, &mask)?;
        let mut rep = morse_index(&op, settings)?;
        rep.radius = Some(r);
        reports.push(rep);
    }
    let index_monotone = reports.windows(2).all(|w| w[1].index >= w[0].index);
    let eigenvalues_monotone = reports.windows(2).all(|w| {
        w[0].lowest_eigenvalues
            .iter()
            .zip(&w[1].lowest_eigenvalues)
            .all(|(a, b)| b.0 <= a.0 + MONOTONE_SLACK)
    });
    let estimated_index = match reports.len() {
        1 => Some(reports[0].index),
        n => (reports[n - 1].index == reports[n - 2].index).then_some(reports[n - 1].index),
    };
    Ok(IndexProfile { reports, index_monotone, eigenvalues_monotone, estimated_index })
}

/// `ξ_R(x)` and `|∇ξ_R(x)|`: 1 on `B_R`, 0 outside `B_{R²}`,
/// `2 − log|x| / log R` between.
pub fn log_cutoff(radius: f64, x: crate::geometry::Vec2) -> (f64, f64) {
    let r = x.norm();
    let lr = ln(radius);
    if r <= radius {
        (1.0, 0.0)
    } else if r >= radius * radius {
        (0.0, 0.0)
    } else {
        (2.0 - ln(r) / lr, 1.0 / (r * lr))
    }
}

/// `∫ |∇ξ_R|²` by finite differences of `ξ_R` over the edges of a grid of
/// spacing `h` covering `B_{R²}`.
pub fn log_cutoff_energy(radius: f64, h: f64) -> f64 {
    let half = radius * radius + 2.0 * h;
    let n = (2.0 * half / h) as usize + 2;
    let origin = -0.5 * (n - 1) as f64 * h;
    let xi = |i: usize, j: usize| {
        let p = crate::geometry::Vec2::new(origin + i as f64 * h, origin + j as f64 * h);
        log_cutoff(radius, p).0
    };
    let mut prev_row: Vec<f64> = (0..n).map(|i| xi(i, 0)).collect();
    let mut sum = 0.0;
    for j in 0..n {
        let row: Vec<f64> = if j == 0 { prev_row.clone() } else { (0..n).map(|i| xi(i, j)).collect() };
        for i in 0..n - 1 {
            let d = row[i + 1] - row[i];
            sum += d * d;
        }
        if j > 0 {
            for i in 0..n {
                let d = row[i] - prev_row[i];
                sum += d * d;
            }
        }
        prev_row = row;
    }
    sum
}

#[derive(Debug, Clone, Copy, PartialEq, Error)]
#[error("eigenvalue {value} (index {position}) is below the floor {floor}")]
pub struct FloorViolation {
    pub position: usize,
    pub value: f64,
    pub floor: f64,
}

/// Every reported eigenvalue is at least `−max{0, −inf V} − tol`.
pub fn eigenvalue_floor_check(report: &SpectralReport, potential_min: f64, tol: f64) -> Result<(), FloorViolation> {
    let floor = -(-potential_min).max(0.0) - tol;
    for (position, &(value, _)) in report.lowest_eigenvalues.iter().enumerate() {
        if value < floor {
            return Err(FloorViolation { position, value, floor });
        }
    }
    Ok(())
}

/// `min V` over a mask.
pub fn potential_min_on(v: &ScalarField, mask: &SubdomainMask) -> f64 {
    mask.nodes().iter().map(|&p| v.values()[p]).fold(f64::INFINITY, f64::min)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CourantReport {
    pub whole_index: usize,
    /// `(index, nullity)` per part, in the given order.
    pub parts: Vec<(usize, usize)>,
    /// `Σ_{i<m} (ind_i + nul_i) + ind_m`.
    pub bound: usize,
    pub null_window: f64,
    pub holds: bool,
}

/// Inertia check of `ind(whole) ≥ Σ_{i<m}(ind_i + nul_i) + ind_m`.
///
/// Parts must be pairwise disjoint subsets of `whole`.
pub fn courant_check(
    u: &ScalarField,
    p: &DoubleWellPotential,
    parts: &[SubdomainMask],
    whole: &SubdomainMask,
    null_window: Option<f64>,
) -> Result<CourantReport, SpectrumError> {
    let flags_len = whole.grid().len();
    let mut owner = vec![false; flags_len];
    for part in parts {
        if !part.is_subset_of(whole) {
            return Err(SpectrumError::Precondition("part is not contained in the whole mask"));
        }
        for &n in part.nodes() {
            if owner[n] {
                return Err(OperatorError::Overlap { node: n }.into());
            }
            owner[n] = true;
        }
    }
    let settings = |w: Option<f64>| IndexSettings { null_window: w, eigenpairs: 0, lanczos: LanczosSettings::default() };
    let whole_op = assemble(u, p, whole)?;
    let eps = null_window.unwrap_or_else(|| whole_op.default_null_window());
    let whole_index = morse_index(&whole_op, settings(Some(eps)))?.index;
    let mut counts = Vec::with_capacity(parts.len());
    for part in parts {
        if part.is_empty() {
            counts.push((0, 0));
            continue;
        }
        let r = morse_index(&assemble(u, p, part)?, settings(Some(eps)))?;
        counts.push((r.index, r.nullity_estimate));
    }
    let bound = match counts.split_last() {
        Some((last, rest)) => rest.iter().map(|c| c.0 + c.1).sum::<usize>() + last.0,
        None => 0,
    };
    Ok(CourantReport { whole_index, parts: counts, bound, null_window: eps, holds: whole_index >= bound })
}

/// `max |−Δ_h v + W″(u) v|` over a mask.
pub fn jacobi_field_check(u: &ScalarField, p: &DoubleWellPotential, v: &ScalarField, mask: &SubdomainMask) -> Result<f64, SpectrumError> {
    if u.grid() != v.grid() || u.grid() != mask.grid() {
        return Err(FieldError::GridMismatch.into());
    }
    let g = *u.grid();
    let n = g.n();
    let inv = 1.0 / (g.h() * g.h());
    let (uu, vv) = (u.values(), v.values());
    let mut worst: f64 = 0.0;
    for &id in mask.nodes() {
        let lap = (vv[id - 1] + vv[id + 1] + vv[id - n] + vv[id + n] - 4.0 * vv[id]) * inv;
        worst = worst.max((-lap + p.ddw(uu[id]) * vv[id]).abs());
    }
    Ok(worst)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InstabilityReport {
    /// Lowest Dirichlet eigenvalue on the nodal domain itself.
    pub lowest_on_domain: f64,
    /// Lowest Dirichlet eigenvalue on the enlargement.
    pub lowest_on_enlarged: f64,
    /// Inertia index of the enlargement.
    pub index_on_enlarged: usize,
    pub null_window: f64,
    pub unstable: bool,
}

/// Tolerances for [`instability_past_nodal`], relative to `‖v‖∞` on `Ω`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodalDomainTolerances {
    /// `sign(v)·v` on the outer neighbours of `Ω` must stay below this.
    pub boundary: f64,
    /// `h² max |−Δ_h v + V v|` on `Ω` must stay below this times `‖v‖∞`.
    pub jacobi: f64,
}

impl Default for NodalDomainTolerances {
    fn default() -> Self {
        Self { boundary: 1e-8, jacobi: 0.05 }
    }
}

/// Enlarging a nodal domain `Ω` of a Jacobi field `v` to `Ω′ ⊋ Ω` produces
/// a negative Dirichlet eigenvalue.
///
/// Preconditions: `v` keeps one sign on `Ω`, does not take that sign on the
/// neighbours of `Ω` (the boundary ring of the grid is the truncation and is
/// exempt), and solves the Jacobi equation on `Ω` up to `tol.jacobi·‖v‖∞`
/// away from the two outermost layers.
pub fn instability_past_nodal(
    u: &ScalarField,
    p: &DoubleWellPotential,
    v: &ScalarField,
    omega: &SubdomainMask,
    enlarged: &SubdomainMask,
    tol: NodalDomainTolerances,
    lanczos: LanczosSettings,
) -> Result<InstabilityReport, SpectrumError> {
    if omega.is_empty() {
        return Err(SpectrumError::Precondition("empty nodal domain"));
    }
    if !omega.is_subset_of(enlarged) || omega.len() == enlarged.len() {
        return Err(SpectrumError::Precondition("enlarged domain must strictly contain the nodal domain"));
    }
    let vals = v.values();
    let sign = if vals[omega.nodes()[0]] >= 0.0 { 1.0 } else { -1.0 };
    let vmax = omega.nodes().iter().map(|&q| vals[q].abs()).fold(0.0, f64::max);
    if vmax == 0.0 || omega.nodes().iter().any(|&q| sign * vals[q] <= 0.0) {
        return Err(SpectrumError::Precondition("field does not keep one strict sign on the domain"));
    }
    let grid = *omega.grid();
    for &q in omega.nodes() {
        for nb in SubdomainMask::neighbours(&grid, q) {
            let (i, j) = grid.ij(nb);
            if !omega.contains(nb) && !grid.is_boundary(i, j) && sign * vals[nb] > tol.boundary * vmax {
                return Err(SpectrumError::Precondition("field does not vanish on the domain boundary"));
            }
        }
    }
    let h = grid.h();
    // v is only defined away from the ring, so its stencil must be too
    let n = grid.n();
    let core = SubdomainMask::from_predicate(grid, |i, j| omega.contains(grid.idx(i, j)) && i >= 2 && j >= 2 && i + 3 <= n && j + 3 <= n);
    if !core.is_empty() && jacobi_field_check(u, p, v, &core)? * h * h > tol.jacobi * vmax {
        return Err(SpectrumError::Precondition("field is not a Jacobi field on the domain"));
    }

    let settings = IndexSettings { null_window: None, eigenpairs: 1, lanczos };
    let inner = morse_index(&assemble(u, p, omega)?, settings)?;
    let outer = morse_index(&assemble(u, p, enlarged)?, settings)?;
    let lowest_on_domain = inner.lowest_eigenvalues.first().map_or(f64::NAN, |e| e.0);
    let lowest_on_enlarged = outer.lowest_eigenvalues.first().map_or(f64::NAN, |e| e.0);
    Ok(InstabilityReport {
        lowest_on_domain,
        lowest_on_enlarged,
        index_on_enlarged: outer.index,
        null_window: outer.null_window,
        unstable: outer.index >= 1 && lowest_on_enlarged < 0.0,
    })
}

/// Smallest Rayleigh quotient over random vectors projected orthogonally
/// (in `ℓ²`) to the given eigenvectors.
pub fn projected_stability(op: &SchrodingerOperator, vectors: &[Vec<f64>], trials: usize, seed: u64) -> Result<f64, SpectrumError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = f64::INFINITY;
    for _ in 0..trials {
        let mut z: Vec<f64> = (0..op.dim()).map(|_| rng.gen::<f64>() - 0.5).collect();
        for _ in 0..2 {
            for q in vectors {
                let c: f64 = z.iter().zip(q).map(|(a, b)| a * b).sum();
                let qq: f64 = q.iter().map(|b| b * b).sum();
                for (zi, qi) in z.iter_mut().zip(q) {
                    *zi -= c / qq * qi;
                }
            }
        }
        worst = worst.min(rayleigh(op, &z)?);
    }
    Ok(worst)
}

/// `sqrt` of the summed squares (used for reporting).
pub fn l2(x: &[f64]) -> f64 {
    sqrt(x.iter().map(|v| v * v).sum())
}
