//! Double-well potentials and the one-dimensional heteroclinic profile.
//!
//! A potential is described by plain function pointers for `W`, `W'` and `W''`
//! together with a convexity certificate `(kappa, alpha)`: `W'' >= kappa` on
//! `|t| > 1 - alpha`. The heteroclinic `H` solves `H' = sqrt(2 W(H))`,
//! `H(0) = 0`, and is built by inverting `t(H) = ∫_0^H ds / sqrt(2 W(s))`.

use alloc::vec::Vec;

use thiserror::Error;

use crate::math::{exp, floor, ln, sqrt};
use crate::quadrature::{integrate, QuadratureFailure};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PotentialError {
    #[error("axiom {axiom:?} violated at t = {t} (value {value})")]
    AxiomViolated { axiom: Axiom, t: f64, value: f64 },
    #[error("invalid convexity certificate: kappa = {kappa}, alpha = {alpha}")]
    InvalidCertificate { kappa: f64, alpha: f64 },
    #[error("heteroclinic quadrature did not converge near s = {at}: integrand = {integrand}")]
    Quadrature { at: f64, integrand: f64 },
    #[error("heteroclinic halfwidth must be at least 5, got {0}")]
    HalfwidthTooSmall(f64),
    #[error("malformed profile samples: {0}")]
    MalformedProfile(&'static str),
}

/// The three defining axioms of a double-well potential.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axiom {
    /// `W >= 0`, vanishing exactly at `±1`.
    H1,
    /// `t W'(t) < 0` on `0 < |t| < 1` and `W''(0) != 0`.
    H2,
    /// `W'' >= kappa` for `|t| > 1 - alpha`.
    H3,
}

#[derive(Clone, Copy)]
pub struct DoubleWellPotential {
    pub name: &'static str,
    w: fn(f64) -> f64,
    dw: fn(f64) -> f64,
    ddw: fn(f64) -> f64,
    pub kappa: f64,
    pub alpha: f64,
}

impl core::fmt::Debug for DoubleWellPotential {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("DoubleWellPotential")
            .field("name", &self.name)
            .field("kappa", &self.kappa)
            .field("alpha", &self.alpha)
            .finish()
    }
}

fn standard_w(t: f64) -> f64 {
    let a = 1.0 - t * t;
    0.25 * a * a
}

fn standard_dw(t: f64) -> f64 {
    t * t * t - t
}

fn standard_ddw(t: f64) -> f64 {
    3.0 * t * t - 1.0
}

impl DoubleWellPotential {
    pub const fn new(
        name: &'static str,
        w: fn(f64) -> f64,
        dw: fn(f64) -> f64,
        ddw: fn(f64) -> f64,
        kappa: f64,
        alpha: f64,
    ) -> Self {
        Self { name, w, dw, ddw, kappa, alpha }
    }

    /// `W(t) = (1 - t^2)^2 / 4`, with `alpha = 0.1` and `kappa = W''(0.9) = 1.43`.
    pub const fn standard() -> Self {
        Self::new("standard", standard_w, standard_dw, standard_ddw, 1.43, 0.1)
    }

    #[inline]
    pub fn w(&self, t: f64) -> f64 {
        (self.w)(t)
    }

    #[inline]
    pub fn dw(&self, t: f64) -> f64 {
        (self.dw)(t)
    }

    #[inline]
    pub fn ddw(&self, t: f64) -> f64 {
        (self.ddw)(t)
    }

    /// Sampled check of H1–H3 on `[-1 - margin, 1 + margin]` plus the points `0, ±1`.
    pub fn verify_axioms(&self, grid: AxiomGrid) -> AxiomReport {
        let mut report = AxiomReport::default();
        if !(self.kappa > 0.0) || !(self.alpha > 0.0 && self.alpha < 1.0) {
            report.certificate_ok = false;
        }
        let zero_tol = 1e-14;
        let slack = 1e-12;

        let record = |slot: &mut Option<AxiomSample>, t: f64, value: f64| {
            if slot.is_none() {
                *slot = Some(AxiomSample { t, value });
            }
        };

        for &t in &[-1.0, 1.0] {
            let v = self.w(t);
            if !(v.abs() <= zero_tol) {
                record(&mut report.h1, t, v);
            }
            let c = self.ddw(t);
            if !(c >= self.kappa - slack) {
                record(&mut report.h3, t, c);
            }
        }
        let c0 = self.ddw(0.0);
        if !(c0.abs() > slack) {
            record(&mut report.h2, 0.0, c0);
        }

        let lo = -1.0 - grid.margin;
        let count = floor(2.0 * (1.0 + grid.margin) / grid.step) as usize + 1;
        for i in 0..count {
            let t = lo + i as f64 * grid.step;
            let v = self.w(t);
            let near_well = (t - 1.0).abs() < 0.5 * grid.step || (t + 1.0).abs() < 0.5 * grid.step;
            if !(v >= 0.0) || (!near_well && !(v > 0.0)) {
                record(&mut report.h1, t, v);
            }
            let a = t.abs();
            if a > slack && a < 1.0 - slack {
                let s = t * self.dw(t);
                if !(s < 0.0) {
                    record(&mut report.h2, t, s);
                }
            }
            if a > 1.0 - self.alpha {
                let c = self.ddw(t);
                if !(c >= self.kappa - slack) {
                    record(&mut report.h3, t, c);
                }
            }
        }
        report
    }

    /// Heteroclinic profile on `[-halfwidth, halfwidth]`.
    pub fn solve_heteroclinic(&self, halfwidth: f64, tol: f64) -> Result<HeteroclinicProfile, PotentialError> {
        HeteroclinicProfile::solve(*self, halfwidth, tol)
    }
}

/// Sampling used by [`DoubleWellPotential::verify_axioms`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxiomGrid {
    pub margin: f64,
    pub step: f64,
}

impl Default for AxiomGrid {
    fn default() -> Self {
        Self { margin: 0.5, step: 1e-3 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxiomSample {
    pub t: f64,
    pub value: f64,
}

/// First violating sample per axiom (`None` means the axiom passed).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxiomReport {
    pub h1: Option<AxiomSample>,
    pub h2: Option<AxiomSample>,
    pub h3: Option<AxiomSample>,
    pub certificate_ok: bool,
}

impl Default for AxiomReport {
    fn default() -> Self {
        Self { h1: None, h2: None, h3: None, certificate_ok: true }
    }
}

impl AxiomReport {
    pub fn passed(&self) -> bool {
        self.certificate_ok && self.h1.is_none() && self.h2.is_none() && self.h3.is_none()
    }

    pub fn violation(&self, axiom: Axiom) -> Option<AxiomSample> {
        match axiom {
            Axiom::H1 => self.h1,
            Axiom::H2 => self.h2,
            Axiom::H3 => self.h3,
        }
    }

    /// Turn the report into an error naming the first violated axiom.
    pub fn ensure(&self, p: &DoubleWellPotential) -> Result<(), PotentialError> {
        if !self.certificate_ok {
            return Err(PotentialError::InvalidCertificate { kappa: p.kappa, alpha: p.alpha });
        }
        for axiom in [Axiom::H1, Axiom::H2, Axiom::H3] {
            if let Some(s) = self.violation(axiom) {
                return Err(PotentialError::AxiomViolated { axiom, t: s.t, value: s.value });
            }
        }
        Ok(())
    }
}

/// Sampled heteroclinic `H` on a uniform grid symmetric about `t = 0`.
#[derive(Debug, Clone)]
pub struct HeteroclinicProfile {
    potential: DoubleWellPotential,
    ts: Vec<f64>,
    hs: Vec<f64>,
    dhs: Vec<f64>,
    dt: f64,
    halfwidth: f64,
}

/// Grid spacing of solved profiles.
pub const PROFILE_STEP: f64 = 0.01;

impl HeteroclinicProfile {
    fn solve(p: DoubleWellPotential, halfwidth: f64, tol: f64) -> Result<Self, PotentialError> {
        if !(halfwidth >= 5.0) {
            return Err(PotentialError::HalfwidthTooSmall(halfwidth));
        }
        let dt = PROFILE_STEP;
        let n_half = libm::ceil(halfwidth / dt - 1e-9) as usize;
        let halfwidth = n_half as f64 * dt;

        // s = +1 - e^{-tau} on the right branch, s = -1 + e^{-tau} on the left.
        let right = branch(&p, 1.0, n_half, dt, tol)?;
        let left = branch(&p, -1.0, n_half, dt, tol)?;

        let n = 2 * n_half + 1;
        let mut ts = Vec::with_capacity(n);
        let mut hs = Vec::with_capacity(n);
        let mut dhs = Vec::with_capacity(n);
        for i in (0..n_half).rev() {
            ts.push(-((i + 1) as f64) * dt);
            hs.push(left[i]);
        }
        ts.push(0.0);
        hs.push(0.0);
        for (i, &h) in right.iter().enumerate() {
            ts.push((i + 1) as f64 * dt);
            hs.push(h);
        }
        for &h in &hs {
            dhs.push(sqrt(2.0 * p.w(h).max(0.0)));
        }
        Ok(Self { potential: p, ts, hs, dhs, dt, halfwidth })
    }

    /// Rebuild a profile from stored samples (e.g. a CSV export).
    pub fn from_samples(
        potential: DoubleWellPotential,
        ts: Vec<f64>,
        hs: Vec<f64>,
        dhs: Vec<f64>,
    ) -> Result<Self, PotentialError> {
        let n = ts.len();
        if n < 3 || hs.len() != n || dhs.len() != n {
            return Err(PotentialError::MalformedProfile("column lengths differ or too few samples"));
        }
        let dt = (ts[n - 1] - ts[0]) / (n - 1) as f64;
        if !(dt > 0.0) {
            return Err(PotentialError::MalformedProfile("grid not increasing"));
        }
        for (i, w) in ts.windows(2).enumerate() {
            if !(w[1] > w[0]) || ((w[1] - w[0]) - dt).abs() > 1e-9 * dt.max(1.0) {
                return Err(PotentialError::MalformedProfile("grid not uniform"));
            }
            if !(hs[i + 1] > hs[i]) {
                return Err(PotentialError::MalformedProfile("profile not increasing"));
            }
        }
        if (ts[0] + ts[n - 1]).abs() > 1e-9 {
            return Err(PotentialError::MalformedProfile("grid not symmetric about 0"));
        }
        let halfwidth = ts[n - 1];
        Ok(Self { potential, ts, hs, dhs, dt, halfwidth })
    }

    pub fn potential(&self) -> &DoubleWellPotential {
        &self.potential
    }

    pub fn ts(&self) -> &[f64] {
        &self.ts
    }

    pub fn hs(&self) -> &[f64] {
        &self.hs
    }

    pub fn dhs(&self) -> &[f64] {
        &self.dhs
    }

    pub fn halfwidth(&self) -> f64 {
        self.halfwidth
    }

    /// Decay rate `sqrt(W''(±1))` of `1 ∓ H` in the tails.
    pub fn tail_rate(&self, side: f64) -> f64 {
        sqrt(self.potential.ddw(if side >= 0.0 { 1.0 } else { -1.0 }))
    }

    /// `(H(t), H'(t))`. Inside the grid this is cubic Hermite interpolation
    /// with the stored slopes (Fritsch–Carlson limited); outside it is the
    /// linearized exponential tail.
    pub fn eval(&self, t: f64) -> (f64, f64) {
        if t.is_nan() {
            return (f64::NAN, f64::NAN);
        }
        let n = self.ts.len();
        if t > self.halfwidth {
            let mu = self.tail_rate(1.0);
            let gap = 1.0 - self.hs[n - 1];
            let decay = exp(-mu * (t - self.halfwidth));
            return (1.0 - gap * decay, mu * gap * decay);
        }
        if t < -self.halfwidth {
            let mu = self.tail_rate(-1.0);
            let gap = 1.0 + self.hs[0];
            let decay = exp(-mu * (-self.halfwidth - t));
            return (-1.0 + gap * decay, mu * gap * decay);
        }
        let x = (t - self.ts[0]) / self.dt;
        let mut i = floor(x) as usize;
        if i >= n - 1 {
            i = n - 2;
        }
        let s = x - i as f64;
        let (h0, h1) = (self.hs[i], self.hs[i + 1]);
        let mut m0 = self.dhs[i] * self.dt;
        let mut m1 = self.dhs[i + 1] * self.dt;
        let delta = h1 - h0;
        if delta > 0.0 {
            let a = m0 / delta;
            let b = m1 / delta;
            let r = a * a + b * b;
            if r > 9.0 {
                let tau = 3.0 / sqrt(r);
                m0 *= tau;
                m1 *= tau;
            }
        }
        let s2 = s * s;
        let s3 = s2 * s;
        let h = (2.0 * s3 - 3.0 * s2 + 1.0) * h0
            + (s3 - 2.0 * s2 + s) * m0
            + (-2.0 * s3 + 3.0 * s2) * h1
            + (s3 - s2) * m1;
        let dh = sqrt(2.0 * self.potential.w(h).max(0.0));
        (h, dh)
    }

    /// `max |H'^2 - 2 W(H)|` over the stored samples.
    pub fn ode_defect(&self) -> f64 {
        self.hs
            .iter()
            .zip(&self.dhs)
            .map(|(&h, &d)| (d * d - 2.0 * self.potential.w(h)).abs())
            .fold(0.0, f64::max)
    }

    /// Least-squares slope of `ln(1 - H)` against `t` over `[a, b]` (right tail).
    pub fn tail_slope(&self, a: f64, b: f64) -> f64 {
        let (mut sx, mut sy, mut sxx, mut sxy, mut m) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for (&t, &h) in self.ts.iter().zip(&self.hs) {
            if t >= a && t <= b && h < 1.0 {
                let y = ln(1.0 - h);
                sx += t;
                sy += y;
                sxx += t * t;
                sxy += t * y;
                m += 1.0;
            }
        }
        (m * sxy - sx * sy) / (m * sxx - sx * sx)
    }
}

/// One branch of the quadrature inversion. Returns `H(i dt)` for `i = 1..=n`
/// (times `sign`), using `s = sign (1 - e^{-tau})`.
fn branch(p: &DoubleWellPotential, sign: f64, n: usize, dt: f64, tol: f64) -> Result<Vec<f64>, PotentialError> {
    let g = |tau: f64| -> f64 {
        let eps = exp(-tau);
        let s = sign * (1.0 - eps);
        eps / sqrt(2.0 * p.w(s))
    };
    let mut out = Vec::with_capacity(n);
    let mut tau_prev = 0.0;
    for _ in 0..n {
        let g0 = g(tau_prev);
        if !g0.is_finite() || g0 <= 0.0 {
            return Err(PotentialError::Quadrature { at: sign * (1.0 - exp(-tau_prev)), integrand: g0 });
        }
        // an error δt in t moves H by about H′·δt, and H′ = e^{-τ}/g
        let slope = exp(-tau_prev) / g0;
        let step_tol = (1e-3 * tol * dt / slope.max(f64::MIN_POSITIVE)).min(1e-2 * dt);
        let mut tau = tau_prev + dt / g0;
        let mut converged = false;
        for _ in 0..60 {
            let q = integrate(&g, tau_prev, tau, 0.5 * step_tol).map_err(|f: QuadratureFailure| {
                PotentialError::Quadrature { at: sign * (1.0 - exp(-f.at)), integrand: f.integrand }
            })?;
            let resid = q - dt;
            let gt = g(tau);
            if !gt.is_finite() || gt <= 0.0 {
                return Err(PotentialError::Quadrature { at: sign * (1.0 - exp(-tau)), integrand: gt });
            }
            let step = resid / gt;
            tau -= step;
            if tau <= tau_prev {
                tau = 0.5 * (tau_prev + tau + step);
            }
            if resid.abs() <= step_tol || step.abs() <= 1e-15 * (1.0 + tau) {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(PotentialError::Quadrature { at: sign * (1.0 - exp(-tau)), integrand: g(tau) });
        }
        out.push(sign * (1.0 - exp(-tau)));
        tau_prev = tau;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::tanh;

    #[test]
    fn standard_values() {
        let p = DoubleWellPotential::standard();
        assert_eq!(p.w(0.0), 0.25);
        assert_eq!(p.w(1.0), 0.0);
        assert_eq!(p.w(-1.0), 0.0);
        assert_eq!(p.dw(1.0), 0.0);
        assert_eq!(p.dw(-1.0), 0.0);
        assert_eq!(p.ddw(0.0), -1.0);
        assert!((p.ddw(0.9) - p.kappa).abs() < 1e-12);
    }

    #[test]
    fn standard_passes_axioms() {
        let r = DoubleWellPotential::standard().verify_axioms(AxiomGrid::default());
        assert!(r.passed(), "{r:?}");
    }

    fn shifted_w(t: f64) -> f64 {
        standard_w(t) + 0.1
    }

    #[test]
    fn shifted_potential_fails_h1() {
        let p = DoubleWellPotential::new("shifted", shifted_w, standard_dw, standard_ddw, 1.43, 0.1);
        let r = p.verify_axioms(AxiomGrid::default());
        assert!(r.h1.is_some());
        assert!(matches!(r.ensure(&p), Err(PotentialError::AxiomViolated { axiom: Axiom::H1, .. })));
    }

    fn cubed_w(t: f64) -> f64 {
        let a = 1.0 - t * t;
        0.25 * a * a * a
    }
    fn cubed_dw(t: f64) -> f64 {
        let a = 1.0 - t * t;
        -1.5 * t * a * a
    }
    fn cubed_ddw(t: f64) -> f64 {
        let a = 1.0 - t * t;
        -1.5 * a * a + 6.0 * t * t * a
    }

    #[test]
    fn cubed_potential_fails_h3_at_well() {
        // W'' = -1.5 (1-t^2)^2 + 6 t^2 (1-t^2) vanishes at t = 1.
        assert_eq!(cubed_ddw(1.0), 0.0);
        let p = DoubleWellPotential::new("cubed", cubed_w, cubed_dw, cubed_ddw, 0.5, 0.1);
        let r = p.verify_axioms(AxiomGrid::default());
        let v = r.h3.expect("H3 must fail");
        assert!(v.t.abs() > 0.9);
    }

    #[test]
    fn bad_certificate_rejected() {
        let mut p = DoubleWellPotential::standard();
        p.alpha = 1.5;
        assert!(matches!(
            p.verify_axioms(AxiomGrid::default()).ensure(&p),
            Err(PotentialError::InvalidCertificate { .. })
        ));
    }

    #[test]
    fn heteroclinic_matches_closed_form_on_grid() {
        let prof = DoubleWellPotential::standard().solve_heteroclinic(12.0, 1e-10).unwrap();
        let mut worst = 0.0f64;
        for (&t, &h) in prof.ts().iter().zip(prof.hs()) {
            worst = worst.max((h - tanh(t / core::f64::consts::SQRT_2)).abs());
        }
        assert!(worst < 1e-9, "worst {worst}");
        assert_eq!(prof.eval(0.0).0, 0.0);
    }

    #[test]
    fn eval_at_one_and_three() {
        let prof = DoubleWellPotential::standard().solve_heteroclinic(10.0, 1e-10).unwrap();
        let (h1, _) = prof.eval(1.0);
        assert!((h1 - 0.608_859_365_013_913_8).abs() < 1e-9);
        let x = 3.0 / core::f64::consts::SQRT_2;
        let (h3, d3) = prof.eval(3.0);
        let sech2 = 1.0 - tanh(x) * tanh(x);
        assert!((h3 - tanh(x)).abs() < 1e-9);
        assert!((d3 - sech2 / core::f64::consts::SQRT_2).abs() < 1e-9);
        let (h0, d0) = prof.eval(0.0);
        assert_eq!(h0, 0.0);
        assert!((d0 - sqrt(0.5)).abs() < 1e-15);
        let (hinf, dinf) = prof.eval(f64::INFINITY);
        assert_eq!((hinf, dinf), (1.0, 0.0));
    }

    #[test]
    fn halfwidth_guard() {
        assert!(matches!(
            DoubleWellPotential::standard().solve_heteroclinic(4.0, 1e-10),
            Err(PotentialError::HalfwidthTooSmall(_))
        ));
    }

    #[test]
    fn degenerate_interior_zero_is_reported() {
        fn bad_w(t: f64) -> f64 {
            // negative near t = 0
            let a = 1.0 - t * t;
            0.25 * a * a - 0.3 * a * a * a * a
        }
        let p = DoubleWellPotential::new("bad", bad_w, standard_dw, standard_ddw, 1.0, 0.1);
        let err = p.solve_heteroclinic(6.0, 1e-10).unwrap_err();
        assert!(matches!(err, PotentialError::Quadrature { .. }), "{err:?}");
    }
}
