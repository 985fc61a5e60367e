//! Oriented-line configurations, the induced planar decomposition and its
//! partition of unity.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::TAU;
use core::ops::{Add, Mul, Neg, Sub};

use thiserror::Error;

use crate::math::{atan2, ceil, cos, hypot, sin, sqrt};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn from_angle(theta: f64) -> Self {
        Self::new(cos(theta), sin(theta))
    }

    pub fn dot(self, o: Vec2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    pub fn cross(self, o: Vec2) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm(self) -> f64 {
        hypot(self.x, self.y)
    }

    pub fn angle(self) -> f64 {
        atan2(self.y, self.x)
    }

    /// Counterclockwise quarter turn.
    pub fn perp(self) -> Vec2 {
        Vec2::new(-self.y, self.x)
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

impl Mul<Vec2> for f64 {
    type Output = Vec2;
    fn mul(self, v: Vec2) -> Vec2 {
        Vec2::new(self * v.x, self * v.y)
    }
}

/// Counterclockwise rotation by `theta`.
pub fn rotate(theta: f64, v: Vec2) -> Vec2 {
    let (s, c) = (sin(theta), cos(theta));
    Vec2::new(c * v.x - s * v.y, s * v.x + c * v.y)
}

/// The line `{ r J f + s f : s ∈ R }` with `f = (cos θ, sin θ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrientedLine {
    pub r: f64,
    pub theta: f64,
}

impl OrientedLine {
    pub const fn new(r: f64, theta: f64) -> Self {
        Self { r, theta }
    }

    pub fn direction(&self) -> Vec2 {
        Vec2::from_angle(self.theta)
    }

    /// `J f`, the positive side of the line.
    pub fn normal(&self) -> Vec2 {
        self.direction().perp()
    }

    pub fn signed_distance(&self, x: Vec2) -> f64 {
        x.dot(self.normal()) - self.r
    }
}

/// Closed half-line `origin + R_+ dir`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HalfLine {
    pub origin: Vec2,
    pub dir: Vec2,
}

impl HalfLine {
    pub fn distance(&self, x: Vec2) -> f64 {
        let d = x - self.origin;
        let t = d.dot(self.dir).max(0.0);
        (d - t * self.dir).norm()
    }

    fn intersects(&self, o: &HalfLine) -> bool {
        let denom = self.dir.cross(o.dir);
        let w = o.origin - self.origin;
        if denom.abs() < 1e-15 {
            // parallel: collinear overlap only
            return w.cross(self.dir).abs() < 1e-12 && (w.dot(self.dir) >= 0.0 || w.dot(o.dir) <= 0.0);
        }
        let t = w.cross(o.dir) / denom;
        let s = w.cross(self.dir) / denom;
        t >= 0.0 && s >= 0.0
    }

    /// Euclidean distance between two half-lines.
    pub fn separation(&self, o: &HalfLine) -> f64 {
        if self.intersects(o) {
            return 0.0;
        }
        self.distance(o.origin).min(o.distance(self.origin))
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("a configuration needs an even, nonzero number of lines, got {0}")]
    OddLineCount(usize),
    #[error("angles must satisfy θ_1 < … < θ_2k < θ_1 + 2π; violated at line {0}")]
    NotOrdered(usize),
    #[error("non-finite line parameters at line {0}")]
    NonFinite(usize),
    #[error("radius {radius} does not exceed the offset |r| of line {line}")]
    RadiusInsideOffset { radius: f64, line: usize },
    #[error("half-lines {i} and {j} are only {distance} apart at radius {radius} (need >= 4)")]
    HalfLinesTooClose { i: usize, j: usize, distance: f64, radius: f64 },
    #[error("no admissible radius found below {0}")]
    NoAdmissibleRadius(f64),
}

/// Minimum separation between distinct half-lines.
pub const MIN_SEPARATION: f64 = 4.0;
/// Added to the minimal admissible radius found on the unit search grid.
pub const RADIUS_MARGIN: f64 = 2.0;

/// An ordered 2k-tuple of oriented lines together with the decomposition
/// radius `R` and the outward half-lines starting on `∂B_R`.
#[derive(Debug, Clone, PartialEq)]
pub struct Configuration {
    lines: Vec<OrientedLine>,
    radius: f64,
    s_offsets: Vec<f64>,
    half_lines: Vec<HalfLine>,
}

impl Configuration {
    /// Build a configuration with the canonical radius: the smallest integer
    /// radius giving admissible half-lines, plus [`RADIUS_MARGIN`].
    pub fn new(lines: Vec<OrientedLine>) -> Result<Self, GeometryError> {
        validate_lines(&lines)?;
        let max_r = lines.iter().map(|l| l.r.abs()).fold(0.0, f64::max);
        let start = ceil(max_r) + 1.0;
        let cap = start + 10_000.0;
        let mut radius = start;
        while radius <= cap {
            if let Ok(c) = Self::with_radius(lines.clone(), radius) {
                return Self::with_radius(c.lines, radius + RADIUS_MARGIN);
            }
            radius += 1.0;
        }
        Err(GeometryError::NoAdmissibleRadius(cap))
    }

    pub fn with_radius(lines: Vec<OrientedLine>, radius: f64) -> Result<Self, GeometryError> {
        validate_lines(&lines)?;
        let mut s_offsets = Vec::with_capacity(lines.len());
        let mut half_lines = Vec::with_capacity(lines.len());
        for (j, l) in lines.iter().enumerate() {
            if !(radius > l.r.abs()) {
                return Err(GeometryError::RadiusInsideOffset { radius, line: j });
            }
            // outward root of |r J f + s f| = R
            let s = sqrt(radius * radius - l.r * l.r);
            s_offsets.push(s);
            half_lines.push(HalfLine { origin: l.r * l.normal() + s * l.direction(), dir: l.direction() });
        }
        for i in 0..half_lines.len() {
            for j in i + 1..half_lines.len() {
                let d = half_lines[i].separation(&half_lines[j]);
                if d < MIN_SEPARATION {
                    return Err(GeometryError::HalfLinesTooClose { i, j, distance: d, radius });
                }
            }
        }
        Ok(Self { lines, radius, s_offsets, half_lines })
    }

    pub fn k(&self) -> usize {
        self.lines.len() / 2
    }

    pub fn lines(&self) -> &[OrientedLine] {
        &self.lines
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn s_offsets(&self) -> &[f64] {
        &self.s_offsets
    }

    pub fn half_lines(&self) -> &[HalfLine] {
        &self.half_lines
    }

    pub fn directions(&self) -> impl Iterator<Item = Vec2> + '_ {
        self.lines.iter().map(OrientedLine::direction)
    }

    /// Cyclic gaps `θ_{i+1} - θ_i`, the last one wrapping through `2π`.
    pub fn cyclic_gaps(&self) -> Vec<f64> {
        cyclic_gaps(&self.lines)
    }

    /// Half the minimum cyclic angular gap.
    pub fn theta_lambda(&self) -> f64 {
        0.5 * self.cyclic_gaps().into_iter().fold(f64::INFINITY, f64::min)
    }

    /// `Σ f_i`; zero for configurations that can be the ends of a solution.
    pub fn balancing_defect(&self) -> Vec2 {
        self.directions().fold(Vec2::ZERO, |a, f| a + f)
    }

    /// Distances from `x` to every half-line.
    pub fn half_line_distances(&self, x: Vec2, out: &mut [f64]) {
        for (o, h) in out.iter_mut().zip(&self.half_lines) {
            *o = h.distance(x);
        }
    }

    /// Membership in the overlapping regions `Ω_0 … Ω_2k`.
    pub fn in_omega(&self, j: usize, x: Vec2) -> bool {
        let rho = x.norm();
        if j == 0 {
            return rho < self.radius + 1.0;
        }
        if rho < self.radius - 1.0 {
            return false;
        }
        let dj = self.half_lines[j - 1].distance(x);
        self.half_lines
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != j - 1)
            .all(|(_, h)| dj < h.distance(x) + 2.0)
    }

    /// Membership in the disjoint cores `Ω_0' … Ω_2k'`.
    pub fn in_omega_prime(&self, j: usize, x: Vec2) -> bool {
        let rho = x.norm();
        if j == 0 {
            return rho < self.radius - 1.0;
        }
        if rho < self.radius + 1.0 {
            return false;
        }
        let dj = self.half_lines[j - 1].distance(x);
        self.half_lines
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != j - 1)
            .all(|(_, h)| dj < h.distance(x) - 2.0)
    }

    /// Dominant region: 0 inside `B_R`, otherwise the nearest half-line
    /// (1-based), ties going to the lower index.
    pub fn region_label(&self, x: Vec2) -> usize {
        if x.norm() < self.radius {
            return 0;
        }
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (i, h) in self.half_lines.iter().enumerate() {
            let d = h.distance(x);
            if best == 0 || d < best_d - 1e-12 * (1.0 + best_d) {
                best_d = d;
                best = i + 1;
            }
        }
        best
    }

    /// Weights `χ_0 … χ_2k` at `x`.
    pub fn partition_of_unity(&self, x: Vec2) -> Vec<f64> {
        let mut w = vec![0.0; self.lines.len() + 1];
        let mut scratch = vec![0.0; self.lines.len()];
        self.partition_of_unity_into(x, &mut scratch, &mut w);
        w
    }

    /// Allocation-free form of [`Self::partition_of_unity`]; `dist` needs
    /// `2k` slots and `out` needs `2k + 1`.
    pub fn partition_of_unity_into(&self, x: Vec2, dist: &mut [f64], out: &mut [f64]) {
        let radial = smootherstep(0.5 * (x.norm() - (self.radius - 1.0)));
        out[0] = 1.0 - radial;
        if radial == 0.0 {
            out[1..].iter_mut().for_each(|v| *v = 0.0);
            return;
        }
        self.half_line_distances(x, dist);
        let n = dist.len();
        let mut total = 0.0;
        for j in 0..n {
            let mut wj = 1.0;
            for i in 0..n {
                if i != j {
                    wj *= smootherstep(0.25 * (dist[i] - dist[j] + 2.0));
                    if wj == 0.0 {
                        break;
                    }
                }
            }
            out[j + 1] = wj;
            total += wj;
        }
        for v in &mut out[1..] {
            *v *= radial / total;
        }
    }
}

/// `C^2` step: 0 below 0, 1 above 1.
pub fn smootherstep(z: f64) -> f64 {
    if z <= 0.0 {
        0.0
    } else if z >= 1.0 {
        1.0
    } else {
        z * z * z * (z * (6.0 * z - 15.0) + 10.0)
    }
}

fn validate_lines(lines: &[OrientedLine]) -> Result<(), GeometryError> {
    if lines.is_empty() || lines.len() % 2 != 0 {
        return Err(GeometryError::OddLineCount(lines.len()));
    }
    for (i, l) in lines.iter().enumerate() {
        if !l.r.is_finite() || !l.theta.is_finite() {
            return Err(GeometryError::NonFinite(i));
        }
    }
    for i in 1..lines.len() {
        if !(lines[i].theta > lines[i - 1].theta) {
            return Err(GeometryError::NotOrdered(i));
        }
    }
    if !(lines[lines.len() - 1].theta < lines[0].theta + TAU) {
        return Err(GeometryError::NotOrdered(lines.len() - 1));
    }
    Ok(())
}

pub(crate) fn cyclic_gaps(lines: &[OrientedLine]) -> Vec<f64> {
    let n = lines.len();
    (0..n)
        .map(|i| {
            if i + 1 < n {
                lines[i + 1].theta - lines[i].theta
            } else {
                lines[0].theta + TAU - lines[n - 1].theta
            }
        })
        .collect()
}

/// Lines through the origin (`r = 0`) at the given angles in degrees.
pub fn lines_from_degrees(degrees: &[f64]) -> Vec<OrientedLine> {
    degrees.iter().map(|d| OrientedLine::new(0.0, d.to_radians())).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::{FRAC_PI_2, FRAC_PI_3, PI};

    fn cfg(deg: &[f64]) -> Configuration {
        Configuration::new(lines_from_degrees(deg)).unwrap()
    }

    #[test]
    fn theta_lambda_examples() {
        assert!((cfg(&[45.0, 135.0, 225.0, 315.0]).theta_lambda() - 45f64.to_radians()).abs() < 1e-12);
        assert!((cfg(&[10.0, 80.0, 190.0, 260.0]).theta_lambda() - 35f64.to_radians()).abs() < 1e-12);
        let hex = cfg(&[0.0, 60.0, 120.0, 180.0, 240.0, 300.0]);
        assert!((hex.theta_lambda() - 30f64.to_radians()).abs() < 1e-12);
    }

    #[test]
    fn balancing_examples() {
        for deg in [[45.0, 135.0, 225.0, 315.0], [0.0, 90.0, 180.0, 270.0], [0.0, 60.0, 180.0, 240.0]] {
            assert!(cfg(&deg).balancing_defect().norm() < 1e-12, "{deg:?}");
        }
        // 1 + 1/2 - 1/2 - 1 = 0, 0 + √3/2 + √3/2 + 0 = √3
        let d = cfg(&[0.0, 60.0, 120.0, 180.0]).balancing_defect();
        assert!(d.x.abs() < 1e-12 && (d.y - 3f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn signed_distance_examples() {
        let l = OrientedLine::new(0.0, 0.0);
        assert_eq!(l.signed_distance(Vec2::new(0.0, 1.0)), 1.0);
        assert_eq!(l.signed_distance(Vec2::new(5.0, 0.0)), 0.0);
        let l = OrientedLine::new(2.0, FRAC_PI_2);
        assert!((l.signed_distance(Vec2::ZERO) + 2.0).abs() < 1e-15);
    }

    #[test]
    fn rotate_examples() {
        let v = rotate(FRAC_PI_2, Vec2::new(1.0, 0.0));
        assert!(v.x.abs() < 1e-16 && (v.y - 1.0).abs() < 1e-16);
        assert_eq!(rotate(0.0, Vec2::new(0.3, -2.0)), Vec2::new(0.3, -2.0));
        let v = rotate(FRAC_PI_3, Vec2::new(1.0, 0.0));
        assert!((v.x - 0.5).abs() < 1e-15 && (v.y - 0.75f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn ordering_enforced() {
        assert_eq!(
            Configuration::new(lines_from_degrees(&[0.0, 90.0, 80.0, 270.0])).unwrap_err(),
            GeometryError::NotOrdered(2)
        );
        assert_eq!(
            Configuration::new(lines_from_degrees(&[0.0, 90.0, 180.0, 360.0])).unwrap_err(),
            GeometryError::NotOrdered(3)
        );
        assert_eq!(Configuration::new(lines_from_degrees(&[0.0, 90.0, 180.0])).unwrap_err(), GeometryError::OddLineCount(3));
    }

    #[test]
    fn canonical_radius_square_cross() {
        // adjacent rays from R f_i are R√2 apart, admissible from R = 3
        let c = cfg(&[45.0, 135.0, 225.0, 315.0]);
        assert_eq!(c.radius(), 5.0);
        for h in c.half_lines() {
            assert!((h.origin.norm() - 5.0).abs() < 1e-12);
        }
    }

    #[test]
    fn too_small_radius_names_pair() {
        let err = Configuration::with_radius(lines_from_degrees(&[45.0, 135.0, 225.0, 315.0]), 2.0).unwrap_err();
        assert!(matches!(err, GeometryError::HalfLinesTooClose { i: 0, j: 1, .. }), "{err:?}");
    }

    #[test]
    fn decomposition_examples() {
        let c = cfg(&[45.0, 135.0, 225.0, 315.0]);
        let r = c.radius();
        let inner = Vec2::new(0.5, -1.0);
        assert!(c.in_omega_prime(0, inner));
        assert!((1..=4).all(|j| !c.in_omega(j, inner) && !c.in_omega_prime(j, inner)));
        let w = c.partition_of_unity(inner);
        assert_eq!(w[0], 1.0);
        assert!(w[1..].iter().all(|&v| v == 0.0));

        let on_ray = (r + 20.0) * Vec2::from_angle(PI / 4.0);
        assert!(c.in_omega_prime(1, on_ray));
        assert_eq!(c.partition_of_unity(on_ray)[1], 1.0);

        // the bisector between rays 1 and 2 points straight up
        let mid = Vec2::new(0.0, r + 3.0);
        assert!(c.in_omega(1, mid) && c.in_omega(2, mid));
        assert!(!c.in_omega_prime(1, mid) && !c.in_omega_prime(2, mid));
        assert_eq!(c.region_label(mid), 1);
        let w = c.partition_of_unity(mid);
        assert!((w[1] - w[2]).abs() < 1e-12);
    }

    #[test]
    fn k1_radius_and_half_lines() {
        let c = Configuration::new(vec![OrientedLine::new(0.0, FRAC_PI_2), OrientedLine::new(0.0, 1.5 * PI)]).unwrap();
        assert_eq!(c.k(), 1);
        assert_eq!(c.radius(), 4.0);
    }
}
