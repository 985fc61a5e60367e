//! Red/blue coloring of end directions relative to a generic direction `e`,
//! the two order claims for same-colored pairs and the count of
//! same-colored groups, plus a randomized oracle over balanced tuples.
//!
//! Indices here are 0-based: the pair `(f_i, f_{i+1})` with even `i` is an
//! "odd pair" in 1-based numbering.

use alloc::vec::Vec;
use core::f64::consts::{PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::geometry::{Configuration, Vec2};
use crate::math::{atan2, cos, sin, wrap_angle};

/// Minimum `|⟨J f_i, e⟩|` for `e` to count as generic.
pub const GENERICITY_TOL: f64 = 1e-6;
/// Slack for the counterclockwise order predicates.
pub const ORDER_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Color {
    Red,
    Blue,
}

impl Color {
    pub fn flip(self) -> Color {
        match self {
            Color::Red => Color::Blue,
            Color::Blue => Color::Red,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ColoringError {
    #[error("direction e is not generic: |<J f_{index}, e>| = {margin}")]
    NotGeneric { index: usize, margin: f64 },
    #[error("direction e must be nonzero and finite")]
    BadDirection,
    #[error("coloring needs k >= 2 (got k = {0})")]
    NeedTwoPairs(usize),
    #[error("oracle supports k in [2, 8] (got {0})")]
    KOutOfRange(usize),
    #[error("angles must be strictly increasing within one turn")]
    NotOrdered,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ColoringReport {
    pub e: Vec2,
    /// Direction angles of `f_1 … f_2k`.
    pub angles: Vec<f64>,
    pub colors: Vec<Color>,
    /// `f_{i+1} = J_{φ_i} f_i`.
    pub phis: Vec<f64>,
    /// Cyclically adjacent equal-color pairs.
    pub same_color_adjacencies: usize,
    /// Maximal cyclic monochromatic runs.
    pub same_color_runs: usize,
    pub genericity_margin: f64,
}

impl ColoringReport {
    pub fn k(&self) -> usize {
        self.colors.len() / 2
    }
}

/// Color the ends of `c` with respect to `e`.
pub fn color(c: &Configuration, e: Vec2) -> Result<ColoringReport, ColoringError> {
    let angles: Vec<f64> = c.lines().iter().map(|l| l.theta).collect();
    color_angles(&angles, e)
}

/// Same as [`color`] on bare direction angles (strictly increasing, spanning
/// less than one turn).
pub fn color_angles(angles: &[f64], e: Vec2) -> Result<ColoringReport, ColoringError> {
    let norm = e.norm();
    if !(norm > 0.0) || !norm.is_finite() {
        return Err(ColoringError::BadDirection);
    }
    let e = (1.0 / norm) * e;
    let m = angles.len();
    if m == 0 || m % 2 != 0 {
        return Err(ColoringError::NotOrdered);
    }
    if angles.windows(2).any(|w| !(w[1] > w[0])) || !(angles[m - 1] < angles[0] + TAU) {
        return Err(ColoringError::NotOrdered);
    }
    let mut colors = Vec::with_capacity(m);
    let mut margin = f64::INFINITY;
    for (i, &t) in angles.iter().enumerate() {
        let jf = Vec2::from_angle(t).perp();
        let s = jf.dot(e);
        if !(s.abs() > GENERICITY_TOL) {
            return Err(ColoringError::NotGeneric { index: i, margin: s.abs() });
        }
        margin = margin.min(s.abs());
        // (-1)^{i+1} with 1-based i is + for even 0-based i
        let signed = if i % 2 == 0 { s } else { -s };
        colors.push(if signed > 0.0 { Color::Blue } else { Color::Red });
    }
    let phis = gaps(angles);
    let same_color_adjacencies = pair_count(&colors);
    let same_color_runs = run_count(&colors);
    Ok(ColoringReport { e, angles: angles.to_vec(), colors, phis, same_color_adjacencies, same_color_runs, genericity_margin: margin })
}

fn gaps(angles: &[f64]) -> Vec<f64> {
    let m = angles.len();
    (0..m).map(|i| if i + 1 < m { angles[i + 1] - angles[i] } else { angles[0] + TAU - angles[m - 1] }).collect()
}

fn pair_count(colors: &[Color]) -> usize {
    let m = colors.len();
    (0..m).filter(|&i| colors[i] == colors[(i + 1) % m]).count()
}

fn run_count(colors: &[Color]) -> usize {
    let changes = colors.len() - pair_count(colors);
    changes.max(1)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GapReport {
    pub phis: Vec<f64>,
    /// Every gap lies in `(0, π)`.
    pub all_below_pi: bool,
}

/// Gaps `φ_i` between consecutive directions and whether all are below `π`.
pub fn gap_angles(c: &Configuration) -> Result<GapReport, ColoringError> {
    if c.k() < 2 {
        return Err(ColoringError::NeedTwoPairs(c.k()));
    }
    let angles: Vec<f64> = c.lines().iter().map(|l| l.theta).collect();
    Ok(gap_report(&angles))
}

fn gap_report(angles: &[f64]) -> GapReport {
    let phis = gaps(angles);
    let all_below_pi = phis.iter().all(|&p| p > 0.0 && p < PI);
    GapReport { phis, all_below_pi }
}

/// `a`, `b`, `c` lie counterclockwise on the circle in this order.
pub fn counterclockwise(a: f64, b: f64, c: f64) -> bool {
    let mut ab = wrap_angle(b - a);
    if ab > TAU - ORDER_TOL {
        ab = 0.0;
    }
    let mut ac = wrap_angle(c - a);
    if ac < ORDER_TOL {
        ac = TAU;
    }
    ab <= ac + ORDER_TOL
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairCertificate {
    /// 0-based index of the first vertex of the pair.
    pub first: usize,
    /// `true` for pairs `(f_{2ℓ-1}, f_{2ℓ})` in 1-based numbering.
    pub odd: bool,
    pub color: Color,
    /// Angles of the three points whose order is asserted.
    pub triple: [f64; 3],
    pub holds: bool,
}

/// Order certificates for every cyclically adjacent same-colored pair.
pub fn claim_predicates(report: &ColoringReport) -> Vec<PairCertificate> {
    let m = report.colors.len();
    let e = atan2(report.e.y, report.e.x);
    let mut out = Vec::new();
    for i in 0..m {
        let color = report.colors[i];
        if color != report.colors[(i + 1) % m] {
            continue;
        }
        let odd = i % 2 == 0;
        let phi = report.phis[i];
        // blue odd and red even pairs straddle e, the other two straddle -e
        let toward_e = odd == (color == Color::Blue);
        let target = if toward_e { e } else { e + PI };
        let triple = [target - phi, report.angles[i], target];
        out.push(PairCertificate { first: i, odd, color, triple, holds: counterclockwise(triple[0], triple[1], triple[2]) });
    }
    out
}

/// Cyclically adjacent equal-color pairs.
pub fn adjacency_count(report: &ColoringReport) -> usize {
    report.same_color_adjacencies
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GroupCheck {
    pub k: usize,
    pub pairs: usize,
    pub runs: usize,
    /// `runs ≥ 2k − 2`.
    pub bound_holds: bool,
    /// `pairs ≥ 2k − 2`.
    pub pair_reading_holds: bool,
    /// A blue odd pair and a red even pair coexist.
    pub blue_odd_red_even: bool,
    /// A red odd pair and a blue even pair coexist.
    pub red_odd_blue_even: bool,
    pub three_consecutive: bool,
    /// With three consecutive same-colored vertices there are exactly
    /// `2k − 2` groups; otherwise at least `2k − 2`.
    pub dichotomy_holds: bool,
}

impl GroupCheck {
    pub fn exclusions_hold(&self) -> bool {
        !self.blue_odd_red_even && !self.red_odd_blue_even
    }
}

/// Count same-colored groups under both readings and test the exclusions.
pub fn group_check(report: &ColoringReport) -> GroupCheck {
    let c = &report.colors;
    let m = c.len();
    let k = m / 2;
    let need = 2 * k - 2;
    let mut flags = [[false; 2]; 2];
    let mut three = false;
    for i in 0..m {
        if c[i] != c[(i + 1) % m] {
            continue;
        }
        flags[i % 2][(c[i] == Color::Blue) as usize] = true;
        if c[(i + 1) % m] == c[(i + 2) % m] {
            three = true;
        }
    }
    let pairs = report.same_color_adjacencies;
    let runs = report.same_color_runs;
    // flags[0] are odd pairs (1-based), flags[1] even pairs; [.][1] blue
    let dichotomy_holds = if three { runs == need } else { runs >= need };
    GroupCheck {
        k,
        pairs,
        runs,
        bound_holds: runs >= need,
        pair_reading_holds: pairs >= need,
        blue_odd_red_even: flags[0][1] && flags[1][0],
        red_odd_blue_even: flags[0][0] && flags[1][1],
        three_consecutive: three,
        dichotomy_holds,
    }
}

/// Gauss–Newton projection of angles onto `Σ f_i = 0` with minimal
/// `Σ Δθ_i²` per step. Returns `None` if it does not converge.
pub fn balance_angles(angles: &mut [f64]) -> Option<()> {
    let m = angles.len() as f64;
    for _ in 0..100 {
        let (mut gx, mut gy) = (0.0, 0.0);
        let (mut a, mut b, mut d) = (0.0, 0.0, 0.0);
        for &t in angles.iter() {
            let (s, c) = (sin(t), cos(t));
            gx += c;
            gy += s;
            a += s * s;
            b -= s * c;
            d += c * c;
        }
        if gx.abs().max(gy.abs()) <= 1e-14 * m {
            return Some(());
        }
        let det = a * d - b * b;
        if !(det.abs() > 1e-12) {
            return None;
        }
        // (J Jᵀ)⁻¹ g, then Δθ = −Jᵀ y with J rows (−sin θ, cos θ)
        let yx = (d * gx - b * gy) / det;
        let yy = (a * gy - b * gx) / det;
        for t in angles.iter_mut() {
            *t -= -sin(*t) * yx + cos(*t) * yy;
        }
    }
    None
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ReadingStats {
    pub min: usize,
    pub max: usize,
    /// Trials with fewer than `2k − 2` groups under this reading.
    pub shortfalls: usize,
}

impl ReadingStats {
    fn record(&mut self, first: bool, value: usize, need: usize) {
        if first {
            self.min = value;
            self.max = value;
        } else {
            self.min = self.min.min(value);
            self.max = self.max.max(value);
        }
        if value < need {
            self.shortfalls += 1;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct OracleStats {
    pub k: usize,
    pub trials: usize,
    pub balanced: bool,
    /// Trials whose projection failed after 100 resamples.
    pub skipped: usize,
    /// Trials failing any of the checks below.
    pub violations: usize,
    pub bound_violations: usize,
    pub exclusion_violations: usize,
    pub dichotomy_violations: usize,
    pub predicate_violations: usize,
    pub gap_violations: usize,
    pub three_consecutive: usize,
    pub pairs: ReadingStats,
    pub runs: ReadingStats,
}

impl OracleStats {
    /// Smallest group count under the reading used for the bound.
    pub fn min_adjacency(&self) -> usize {
        self.runs.min
    }
}

const MAX_ATTEMPTS: usize = 100;

/// Randomized check of the coloring claims over `trials` balanced tuples.
pub fn bruteforce_oracle(k: usize, trials: usize, seed: u64) -> Result<OracleStats, ColoringError> {
    run_oracle(k, trials, seed, true)
}

/// The same checks without the balancing projection.
pub fn unbalanced_control(k: usize, trials: usize, seed: u64) -> Result<OracleStats, ColoringError> {
    run_oracle(k, trials, seed, false)
}

fn trial_rng(seed: u64, k: usize, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (k as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
    rng.set_stream(trial as u64);
    rng
}

fn sample(rng: &mut ChaCha8Rng, m: usize, balanced: bool) -> Option<(Vec<f64>, Vec2)> {
    let mut angles: Vec<f64> = (0..m).map(|_| rng.gen_range(0.0..TAU)).collect();
    angles.sort_by(f64::total_cmp);
    if balanced {
        balance_angles(&mut angles)?;
        let base = angles[0];
        for t in angles.iter_mut().skip(1) {
            *t = base + wrap_angle(*t - base);
        }
    }
    let ordered = angles.windows(2).all(|w| w[1] - w[0] > 1e-9) && angles[0] + TAU - angles[m - 1] > 1e-9;
    if !ordered {
        return None;
    }
    let beta = rng.gen_range(0.0..TAU);
    let e = Vec2::from_angle(beta);
    let generic = angles.iter().all(|&t| Vec2::from_angle(t).perp().dot(e).abs() > GENERICITY_TOL);
    generic.then_some((angles, e))
}

fn run_oracle(k: usize, trials: usize, seed: u64, balanced: bool) -> Result<OracleStats, ColoringError> {
    if !(2..=8).contains(&k) {
        return Err(ColoringError::KOutOfRange(k));
    }
    let m = 2 * k;
    let need = 2 * k - 2;
    let mut stats = OracleStats { k, trials, balanced, ..OracleStats::default() };
    let mut first = true;
    for trial in 0..trials {
        let mut rng = trial_rng(seed, k, trial);
        let Some((angles, e)) = (0..MAX_ATTEMPTS).find_map(|_| sample(&mut rng, m, balanced)) else {
            stats.skipped += 1;
            continue;
        };
        let report = color_angles(&angles, e)?;
        let g = group_check(&report);
        let predicates = claim_predicates(&report).iter().all(|p| p.holds);
        let gaps_ok = gap_report(&angles).all_below_pi;
        stats.pairs.record(first, g.pairs, need);
        stats.runs.record(first, g.runs, need);
        first = false;
        stats.three_consecutive += g.three_consecutive as usize;
        stats.bound_violations += !g.bound_holds as usize;
        stats.exclusion_violations += !g.exclusions_hold() as usize;
        stats.dichotomy_violations += !g.dichotomy_holds as usize;
        stats.predicate_violations += !predicates as usize;
        stats.gap_violations += !gaps_ok as usize;
        if !(g.bound_holds && g.exclusions_hold() && g.dichotomy_holds && predicates && gaps_ok) {
            stats.violations += 1;
        }
    }
    Ok(stats)
}

/// Colors of a synthetic sequence, for exercising the counters directly.
pub fn synthetic_report(colors: &[Color]) -> ColoringReport {
    let m = colors.len();
    let angles: Vec<f64> = (0..m).map(|i| TAU * i as f64 / m as f64).collect();
    ColoringReport {
        e: Vec2::new(1.0, 0.0),
        phis: gaps(&angles),
        angles,
        colors: colors.to_vec(),
        same_color_adjacencies: pair_count(colors),
        same_color_runs: run_count(colors),
        genericity_margin: 0.0,
    }
}

/// Colors with `e ↦ −e`.
pub fn flipped(colors: &[Color]) -> Vec<Color> {
    colors.iter().map(|c| c.flip()).collect()
}
