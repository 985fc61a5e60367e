//! The glued approximate solution `u_λ = Σ_j (-1)^{j+1} χ_j H(dist^s(·, λ_j))`
//! and the decay diagnostic for `u - u_λ`.

use alloc::vec;
use alloc::vec::Vec;

use thiserror::Error;

use crate::field::{FieldError, Grid, ScalarField};
use crate::geometry::Configuration;
use crate::math::{floor, ln};
use crate::potential::HeteroclinicProfile;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnsatzError {
    #[error("grid half-width {half_width} does not contain B_(R+1) with R = {radius}")]
    GridTooSmall { half_width: f64, radius: f64 },
    #[error("decay fit window [{lo}, {hi}] is empty")]
    EmptyFitWindow { lo: f64, hi: f64 },
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// Sample `u_λ` on `grid`.
pub fn sample_ansatz(c: &Configuration, profile: &HeteroclinicProfile, grid: Grid) -> Result<ScalarField, AnsatzError> {
    if grid.half_width() < c.radius() + 1.0 {
        return Err(AnsatzError::GridTooSmall { half_width: grid.half_width(), radius: c.radius() });
    }
    let m = c.lines().len();
    let mut dist = vec![0.0; m];
    let mut chi = vec![0.0; m + 1];
    Ok(ScalarField::from_fn(grid, |x| {
        c.partition_of_unity_into(x, &mut dist, &mut chi);
        let mut u = 0.0;
        for (j, line) in c.lines().iter().enumerate() {
            let w = chi[j + 1];
            if w != 0.0 {
                let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                u += sign * w * profile.eval(line.signed_distance(x)).0;
            }
        }
        u
    }))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecayStatus {
    /// `u - u_λ` vanishes on the whole window.
    IdenticallyZero,
    /// Every shell sup is below [`NOISE_FLOOR`].
    BelowNoiseFloor,
    /// A rate was fitted.
    Fitted,
}

pub const NOISE_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct DecayReport {
    pub status: DecayStatus,
    /// Fitted `δ̂` in `sup_{|x| = ρ} |u - u_λ| ≈ C e^{-δ̂ ρ}`.
    pub rate: Option<f64>,
    /// RMS residual of the log-linear fit.
    pub fit_residual: f64,
    /// `(shell radius, sup |u - u_λ|)` over the window.
    pub shells: Vec<(f64, f64)>,
}

/// Fit the exponential decay rate of `u - u_λ` over `ρ ∈ [R + 2, L - 2]`,
/// using sup norms over annular shells of width `h`.
pub fn decay_report(u: &ScalarField, ulam: &ScalarField, c: &Configuration) -> Result<DecayReport, AnsatzError> {
    if u.grid() != ulam.grid() {
        return Err(FieldError::GridMismatch.into());
    }
    let g = *u.grid();
    let lo = c.radius() + 2.0;
    let hi = g.half_width() - 2.0;
    if !(hi > lo) {
        return Err(AnsatzError::EmptyFitWindow { lo, hi });
    }
    let h = g.h();
    let bins = floor((hi - lo) / h) as usize + 1;
    let mut sup = vec![0.0f64; bins];
    let mut seen = vec![false; bins];
    for j in 0..g.n() {
        for i in 0..g.n() {
            let rho = g.point(i, j).norm();
            if rho < lo || rho > hi {
                continue;
            }
            let b = (floor((rho - lo) / h) as usize).min(bins - 1);
            let k = g.idx(i, j);
            sup[b] = sup[b].max((u.values()[k] - ulam.values()[k]).abs());
            seen[b] = true;
        }
    }
    let shells: Vec<(f64, f64)> = (0..bins).filter(|&b| seen[b]).map(|b| (lo + (b as f64 + 0.5) * h, sup[b])).collect();
    if shells.is_empty() {
        return Err(AnsatzError::EmptyFitWindow { lo, hi });
    }
    let peak = shells.iter().fold(0.0f64, |m, s| m.max(s.1));
    if peak == 0.0 {
        return Ok(DecayReport { status: DecayStatus::IdenticallyZero, rate: None, fit_residual: 0.0, shells });
    }
    if peak < NOISE_FLOOR {
        return Ok(DecayReport { status: DecayStatus::BelowNoiseFloor, rate: None, fit_residual: 0.0, shells });
    }
    let pts: Vec<(f64, f64)> = shells.iter().filter(|s| s.1 > 0.0).map(|&(r, s)| (r, ln(s))).collect();
    let (slope, intercept) = least_squares(&pts);
    let rms = {
        let ss: f64 = pts.iter().map(|&(x, y)| {
            let r = y - (slope * x + intercept);
            r * r
        }).sum();
        crate::math::sqrt(ss / pts.len() as f64)
    };
    Ok(DecayReport { status: DecayStatus::Fitted, rate: Some(-slope), fit_residual: rms, shells })
}

/// Ordinary least squares `y = a x + b`.
pub(crate) fn least_squares(pts: &[(f64, f64)]) -> (f64, f64) {
    let m = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |(a, b), &(x, y)| (a + x, b + y));
    let (mx, my) = (sx / m, sy / m);
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for &(x, y) in pts {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    let a = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    (a, my - a * mx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{lines_from_degrees, OrientedLine, Vec2};
    use crate::potential::DoubleWellPotential;
    use core::f64::consts::{FRAC_PI_2, PI};

    fn profile() -> HeteroclinicProfile {
        DoubleWellPotential::standard().solve_heteroclinic(20.0, 1e-10).unwrap()
    }

    #[test]
    fn k1_reproduces_planar_heteroclinic_far_out() {
        // λ_1 = (0, 90°) has J f = (-1, 0); λ_2 = (0, 270°) is the same line reversed.
        let c = Configuration::new(vec![OrientedLine::new(0.0, FRAC_PI_2), OrientedLine::new(0.0, 1.5 * PI)]).unwrap();
        let prof = profile();
        let g = Grid::centered(12.0, 0.5).unwrap();
        let u = sample_ansatz(&c, &prof, g).unwrap();
        for j in 0..g.n() {
            for i in 0..g.n() {
                let x = g.point(i, j);
                if x.norm() >= c.radius() + 1.0 {
                    let expect = prof.eval(-x.x).0;
                    assert!((u.at(i, j) - expect).abs() < 1e-12, "{x:?}");
                }
                if x.norm() < c.radius() - 1.0 {
                    assert_eq!(u.at(i, j), 0.0);
                }
            }
        }
    }

    #[test]
    fn square_cross_sector_two_sign() {
        let c = Configuration::new(lines_from_degrees(&[45.0, 135.0, 225.0, 315.0])).unwrap();
        let prof = profile();
        let g = Grid::centered(30.0, 0.5).unwrap();
        let u = sample_ansatz(&c, &prof, g).unwrap();
        // deep along the 135° ray, offset slightly to its positive side
        let x = 24.0 * Vec2::from_angle(0.75 * PI) + 0.5 * c.lines()[1].normal();
        let (i, j) = (g.nearest(x.x), g.nearest(x.y));
        let p = g.point(i, j);
        let expect = -prof.eval(c.lines()[1].signed_distance(p)).0;
        assert!((u.at(i, j) - expect).abs() < 1e-12);
        assert!(u.max_abs() <= 1.0 + 1e-6);
    }

    #[test]
    fn grid_must_contain_core() {
        let c = Configuration::new(lines_from_degrees(&[45.0, 135.0, 225.0, 315.0])).unwrap();
        let g = Grid::centered(5.5, 0.5).unwrap();
        assert!(matches!(sample_ansatz(&c, &profile(), g), Err(AnsatzError::GridTooSmall { .. })));
    }

    #[test]
    fn decay_of_identical_fields() {
        let c = Configuration::new(lines_from_degrees(&[45.0, 135.0, 225.0, 315.0])).unwrap();
        let g = Grid::centered(12.0, 0.5).unwrap();
        let u = sample_ansatz(&c, &profile(), g).unwrap();
        let r = decay_report(&u, &u, &c).unwrap();
        assert_eq!(r.status, DecayStatus::IdenticallyZero);
        assert!(r.rate.is_none());
        let small = Grid::centered(8.0, 0.5).unwrap();
        let u = sample_ansatz(&c, &profile(), small).unwrap();
        assert!(matches!(decay_report(&u, &u, &c), Err(AnsatzError::EmptyFitWindow { .. })));
    }

    #[test]
    fn exact_exponential_rate_is_recovered() {
        let c = Configuration::new(lines_from_degrees(&[45.0, 135.0, 225.0, 315.0])).unwrap();
        let g = Grid::centered(20.0, 0.1).unwrap();
        let a = ScalarField::from_fn(g, |x| 0.3 * crate::math::exp(-0.7 * x.norm()));
        let b = ScalarField::zeros(g);
        let r = decay_report(&a, &b, &c).unwrap();
        assert_eq!(r.status, DecayStatus::Fitted);
        assert!((r.rate.unwrap() - 0.7).abs() < 0.01, "{:?}", r.rate);
    }
}
