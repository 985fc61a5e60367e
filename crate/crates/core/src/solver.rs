//! Relaxation of an initial field to a discrete solution of `Δ_h u = W′(u)`
//! with Dirichlet data pinned on the boundary ring.

use alloc::vec;
use alloc::vec::Vec;

use thiserror::Error;

use crate::field::{FieldError, ScalarField};
use crate::geometry::Configuration;
use crate::operator::{SchrodingerOperator, SubdomainMask};
use crate::potential::DoubleWellPotential;
use crate::sparse::LdlFactor;

/// Balancing defects above this are flagged on the solution.
pub const BALANCE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverSettings {
    pub residual_tol: f64,
    pub max_iter: usize,
    pub fallback_steps: usize,
    pub min_step: f64,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self { residual_tol: 1e-10, max_iter: 60, fallback_steps: 500, min_step: 1.0 / (1u32 << 20) as f64 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepKind {
    Initial,
    Newton,
    GradientFlow,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationRecord {
    pub iter: usize,
    pub residual_inf: f64,
    pub energy: f64,
    /// Accepted damping factor, or the flow time step.
    pub step: f64,
    pub kind: StepKind,
}

#[derive(Debug, Clone)]
pub struct DiscreteProblem {
    pub field: ScalarField,
    pub potential: DoubleWellPotential,
    pub settings: SolverSettings,
    /// `|Σ f_i|` when the ansatz came from an unbalanced configuration.
    pub balancing_warning: Option<f64>,
}

impl DiscreteProblem {
    /// The boundary ring of `initial` is the Dirichlet data.
    pub fn new(initial: ScalarField, potential: DoubleWellPotential, settings: SolverSettings) -> Self {
        Self { field: initial, potential, settings, balancing_warning: None }
    }

    /// Record a balancing violation of the configuration behind the ansatz.
    pub fn flag_balancing(mut self, c: &Configuration) -> Self {
        let d = c.balancing_defect().norm();
        self.balancing_warning = (d > BALANCE_TOL).then_some(d);
        self
    }

    pub fn interior_unknowns(&self) -> usize {
        let n = self.field.grid().n();
        (n - 2) * (n - 2)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub field: ScalarField,
    pub log: Vec<IterationRecord>,
    pub balancing_warning: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolveError {
    #[error("no convergence after {iterations} iterations (best residual {best_residual:e})")]
    NotConverged { iterations: usize, best_residual: f64, best: ScalarField, log: Vec<IterationRecord> },
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// `Δ_h u − W′(u)` on interior nodes, zero on the ring.
pub fn residual(u: &ScalarField, p: &DoubleWellPotential) -> ScalarField {
    let g = *u.grid();
    let n = g.n();
    let inv = 1.0 / (g.h() * g.h());
    let v = u.values();
    let mut out = ScalarField::zeros(g);
    let r = out.values_mut();
    for j in 1..n - 1 {
        for i in 1..n - 1 {
            let id = j * n + i;
            let lap = (v[id - 1] + v[id + 1] + v[id - n] + v[id + n] - 4.0 * v[id]) * inv;
            r[id] = lap - p.dw(v[id]);
        }
    }
    out
}

fn trapezoid_weight(i: usize, n: usize) -> f64 {
    if i == 0 || i == n - 1 {
        0.5
    } else {
        1.0
    }
}

/// Trapezoidal discretisation of `∫ ½|∇u|² + W(u)` over the grid square.
///
/// Gradients live on edges (weighted by the trapezoid rule across them), so
/// that [`first_variation`] is the exact derivative of this sum.
pub fn energy(u: &ScalarField, p: &DoubleWellPotential) -> f64 {
    let g = *u.grid();
    let n = g.n();
    let h2 = g.h() * g.h();
    let v = u.values();
    let mut grad = 0.0;
    let mut pot = 0.0;
    for j in 0..n {
        let cj = trapezoid_weight(j, n);
        for i in 0..n {
            let ci = trapezoid_weight(i, n);
            let id = j * n + i;
            if i + 1 < n {
                let d = v[id + 1] - v[id];
                grad += cj * d * d;
            }
            if j + 1 < n {
                let d = v[id + n] - v[id];
                grad += ci * d * d;
            }
            pot += ci * cj * p.w(v[id]);
        }
    }
    0.5 * grad + h2 * pot
}

/// Directional derivative of [`energy`] at `u` along `zeta`.
pub fn first_variation(u: &ScalarField, zeta: &ScalarField, p: &DoubleWellPotential) -> Result<f64, FieldError> {
    if u.grid() != zeta.grid() {
        return Err(FieldError::GridMismatch);
    }
    let g = *u.grid();
    let n = g.n();
    let h2 = g.h() * g.h();
    let (v, z) = (u.values(), zeta.values());
    let mut grad = 0.0;
    let mut pot = 0.0;
    for j in 0..n {
        let cj = trapezoid_weight(j, n);
        for i in 0..n {
            let ci = trapezoid_weight(i, n);
            let id = j * n + i;
            if i + 1 < n {
                grad += cj * (v[id + 1] - v[id]) * (z[id + 1] - z[id]);
            }
            if j + 1 < n {
                grad += ci * (v[id + n] - v[id]) * (z[id + n] - z[id]);
            }
            pot += ci * cj * p.dw(v[id]) * z[id];
        }
    }
    Ok(grad + h2 * pot)
}

fn interior_norms(r: &ScalarField) -> (f64, f64) {
    let mut inf: f64 = 0.0;
    let mut two = 0.0;
    for &x in r.values() {
        inf = inf.max(x.abs());
        two += x * x;
    }
    (inf, two)
}

/// Damped Newton with Armijo backtracking on `½‖F‖₂²` and an explicit
/// gradient-flow fallback when the line search stalls.
pub fn newton_solve(problem: &DiscreteProblem) -> Result<Solution, SolveError> {
    let p = &problem.potential;
    let s = problem.settings;
    let grid = *problem.field.grid();
    let h = grid.h();
    let mask = SubdomainMask::interior(grid);
    let order = mask.ordering();

    let mut u = problem.field.clone();
    let mut r = residual(&u, p);
    let (mut rinf, mut r2) = interior_norms(&r);
    let mut log = vec![IterationRecord { iter: 0, residual_inf: rinf, energy: energy(&u, p), step: 0.0, kind: StepKind::Initial }];
    let mut best = (rinf, u.clone());
    let mut iter = 0;

    while rinf > s.residual_tol {
        if iter >= s.max_iter {
            return Err(SolveError::NotConverged { iterations: iter, best_residual: best.0, best: best.1, log });
        }
        iter += 1;

        let mut accepted = None;
        if let Some(delta) = newton_direction(&u, p, &mask, &order, &r) {
            let mut alpha = 1.0;
            while alpha >= s.min_step {
                let trial = axpy(&u, alpha, &delta, &mask);
                let rt = residual(&trial, p);
                let (ti, t2) = interior_norms(&rt);
                if t2.is_finite() && t2 <= (1.0 - 1e-4 * alpha) * r2 {
                    accepted = Some((trial, rt, ti, t2, alpha));
                    break;
                }
                alpha *= 0.5;
            }
        }

        match accepted {
            Some((nu, nr, ni, n2, alpha)) => {
                u = nu;
                r = nr;
                rinf = ni;
                r2 = n2;
                log.push(IterationRecord { iter, residual_inf: rinf, energy: energy(&u, p), step: alpha, kind: StepKind::Newton });
            }
            None => {
                let tau = h * h / 8.0;
                for _ in 0..s.fallback_steps {
                    let vals = u.values_mut();
                    for &id in mask.nodes() {
                        vals[id] += tau * r.values()[id];
                    }
                    r = residual(&u, p);
                }
                let (ni, n2) = interior_norms(&r);
                rinf = ni;
                r2 = n2;
                log.push(IterationRecord { iter, residual_inf: rinf, energy: energy(&u, p), step: tau, kind: StepKind::GradientFlow });
            }
        }
        if rinf < best.0 {
            best = (rinf, u.clone());
        }
    }
    Ok(Solution { field: u, log, balancing_warning: problem.balancing_warning })
}

/// Solve `(−Δ_h + W″(u)) δ = F(u)` on the interior, i.e. `J δ = −F`.
fn newton_direction(u: &ScalarField, p: &DoubleWellPotential, mask: &SubdomainMask, order: &[usize], r: &ScalarField) -> Option<Vec<f64>> {
    let op = SchrodingerOperator::jacobi(u, p, mask).ok()?;
    let tol = f64::EPSILON * op.matrix().max_abs_diagonal();
    let f = LdlFactor::new(op.matrix(), order, 0.0, tol).ok()?;
    let mut rhs = mask.gather(r);
    f.solve_in_place(&mut rhs).ok()?;
    rhs.iter().all(|x| x.is_finite()).then_some(rhs)
}

fn axpy(u: &ScalarField, alpha: f64, delta: &[f64], mask: &SubdomainMask) -> ScalarField {
    let mut out = u.clone();
    let vals = out.values_mut();
    for (&id, d) in mask.nodes().iter().zip(delta) {
        vals[id] += alpha * d;
    }
    out
}
