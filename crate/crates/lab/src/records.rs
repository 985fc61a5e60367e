//! Serializable views of the core results.

use acmorse_core::coloring::{Color, ColoringReport, GroupCheck, OracleStats, ReadingStats};
use acmorse_core::nodal::{ChainReport, EulerReport, NodalGraph};
use acmorse_core::spectrum::{IndexProfile, SpectralReport};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Eigenvalue {
    pub value: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralRecord {
    pub radius: Option<f64>,
    pub index: usize,
    pub nullity_estimate: usize,
    pub null_window: f64,
    pub dimension: usize,
    pub eigenvalues_certified: bool,
    pub eigenvalues: Vec<Eigenvalue>,
}

impl From<&SpectralReport> for SpectralRecord {
    fn from(r: &SpectralReport) -> Self {
        Self {
            radius: r.radius,
            index: r.index,
            nullity_estimate: r.nullity_estimate,
            null_window: r.null_window,
            dimension: r.dimension,
            eigenvalues_certified: r.eigenvalues_certified,
            eigenvalues: r.lowest_eigenvalues.iter().map(|&(value, residual)| Eigenvalue { value, residual }).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectraRecord {
    pub estimated_index: Option<usize>,
    pub index_monotone: bool,
    pub eigenvalues_monotone: bool,
    pub reports: Vec<SpectralRecord>,
}

impl From<&IndexProfile> for SpectraRecord {
    fn from(p: &IndexProfile) -> Self {
        Self {
            estimated_index: p.estimated_index,
            index_monotone: p.index_monotone,
            eigenvalues_monotone: p.eigenvalues_monotone,
            reports: p.reports.iter().map(SpectralRecord::from).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterRecord {
    pub position: [f64; 2],
    pub degree: usize,
    pub nodes: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveRecord {
    pub singular_ends: Vec<usize>,
    pub unbounded_ends: usize,
    pub closed: bool,
    pub polyline: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainRecord {
    pub sign: i8,
    pub bounded: bool,
    /// Grid nodes in the domain.
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EulerRecord {
    pub q: usize,
    pub components: usize,
    pub singular: usize,
    pub holds: bool,
}

impl From<&EulerReport> for EulerRecord {
    fn from(e: &EulerReport) -> Self {
        Self { q: e.q, components: e.components, singular: e.singular, holds: e.holds }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainRecord {
    pub k: usize,
    /// Curves with 0, 1 and 2 ends on a singular point.
    pub by_end_count: [usize; 3],
    pub incidences: usize,
    pub singular: usize,
    pub q: usize,
    pub ends: usize,
    pub hypothesis_ok: bool,
    pub ends_bound: bool,
    pub incidence_bound: bool,
    pub domain_bound: bool,
    pub q_at_least_k: bool,
}

impl From<&ChainReport> for ChainRecord {
    fn from(c: &ChainReport) -> Self {
        Self {
            k: c.k,
            by_end_count: c.by_end_count,
            incidences: c.incidences,
            singular: c.singular,
            q: c.q,
            ends: c.ends,
            hypothesis_ok: c.hypothesis_ok,
            ends_bound: c.ends_bound,
            incidence_bound: c.incidence_bound,
            domain_bound: c.domain_bound,
            q_at_least_k: c.q_at_least_k,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodalRecord {
    pub direction: [f64; 2],
    pub truncation_radius: f64,
    pub eps_v: f64,
    pub eps_g: f64,
    pub min_crossing_transversality: f64,
    pub singular_points: Vec<ClusterRecord>,
    pub curves: Vec<CurveRecord>,
    pub domains: Vec<DomainRecord>,
    pub ends_outside: usize,
    pub euler: EulerRecord,
    pub chain: ChainRecord,
}

impl NodalRecord {
    pub fn new(g: &NodalGraph, direction: [f64; 2], ends_outside: usize, euler: &EulerReport, chain: &ChainReport) -> Self {
        Self {
            direction,
            truncation_radius: g.truncation_radius,
            eps_v: g.eps_v,
            eps_g: g.eps_g,
            min_crossing_transversality: g.min_crossing_transversality,
            singular_points: g
                .singular_points
                .iter()
                .map(|s| ClusterRecord { position: [s.position.x, s.position.y], degree: s.degree, nodes: s.nodes.clone() })
                .collect(),
            curves: g
                .curves
                .iter()
                .map(|c| CurveRecord {
                    singular_ends: c.singular_ends.clone(),
                    unbounded_ends: c.unbounded_ends,
                    closed: c.closed,
                    polyline: c.polyline.iter().map(|p| [p.x, p.y]).collect(),
                })
                .collect(),
            domains: g.domains.iter().map(|d| DomainRecord { sign: d.sign, bounded: d.bounded, size: d.nodes.len() }).collect(),
            ends_outside,
            euler: euler.into(),
            chain: chain.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColorName {
    Red,
    Blue,
}

impl From<Color> for ColorName {
    fn from(c: Color) -> Self {
        match c {
            Color::Red => ColorName::Red,
            Color::Blue => ColorName::Blue,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupRecord {
    pub pairs: usize,
    pub runs: usize,
    pub bound_holds: bool,
    pub pair_reading_holds: bool,
    pub blue_odd_red_even: bool,
    pub red_odd_blue_even: bool,
    pub three_consecutive: bool,
    pub dichotomy_holds: bool,
}

impl From<&GroupCheck> for GroupRecord {
    fn from(g: &GroupCheck) -> Self {
        Self {
            pairs: g.pairs,
            runs: g.runs,
            bound_holds: g.bound_holds,
            pair_reading_holds: g.pair_reading_holds,
            blue_odd_red_even: g.blue_odd_red_even,
            red_odd_blue_even: g.red_odd_blue_even,
            three_consecutive: g.three_consecutive,
            dichotomy_holds: g.dichotomy_holds,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColoringRecord {
    pub k: usize,
    pub e: [f64; 2],
    pub angles: Vec<f64>,
    pub colors: Vec<ColorName>,
    pub phis: Vec<f64>,
    pub same_color_adjacencies: usize,
    pub same_color_runs: usize,
    pub genericity_margin: f64,
    pub groups: GroupRecord,
}

impl ColoringRecord {
    pub fn new(r: &ColoringReport, g: &GroupCheck) -> Self {
        Self {
            k: r.k(),
            e: [r.e.x, r.e.y],
            angles: r.angles.clone(),
            colors: r.colors.iter().map(|&c| c.into()).collect(),
            phis: r.phis.clone(),
            same_color_adjacencies: r.same_color_adjacencies,
            same_color_runs: r.same_color_runs,
            genericity_margin: r.genericity_margin,
            groups: g.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReadingRecord {
    pub min: usize,
    pub max: usize,
    /// Samples below `2k − 2` under this reading.
    pub shortfalls: usize,
}

impl From<&ReadingStats> for ReadingRecord {
    fn from(r: &ReadingStats) -> Self {
        Self { min: r.min, max: r.max, shortfalls: r.shortfalls }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interpretations {
    pub pairs: ReadingRecord,
    pub runs: ReadingRecord,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleRecord {
    pub k: usize,
    pub trials: usize,
    pub seed: u64,
    pub balanced: bool,
    pub skipped: usize,
    pub violations: usize,
    pub min_adjacency: usize,
    pub bound_violations: usize,
    pub exclusion_violations: usize,
    pub dichotomy_violations: usize,
    pub predicate_violations: usize,
    pub gap_violations: usize,
    pub three_consecutive: usize,
    pub interpretations: Interpretations,
}

impl OracleRecord {
    pub fn new(s: &OracleStats, seed: u64) -> Self {
        Self {
            k: s.k,
            trials: s.trials,
            seed,
            balanced: s.balanced,
            skipped: s.skipped,
            violations: s.violations,
            min_adjacency: s.min_adjacency(),
            bound_violations: s.bound_violations,
            exclusion_violations: s.exclusion_violations,
            dichotomy_violations: s.dichotomy_violations,
            predicate_violations: s.predicate_violations,
            gap_violations: s.gap_violations,
            three_consecutive: s.three_consecutive,
            interpretations: Interpretations { pairs: (&s.pairs).into(), runs: (&s.runs).into() },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColoringArtifact {
    pub configuration: ColoringRecord,
    /// Randomized check over balanced configurations with the same `k`;
    /// absent when `k` is outside the oracle's range or no trials were asked.
    pub oracle: Option<OracleRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub k: usize,
    pub estimated_index: Option<usize>,
    pub q: usize,
    pub ends: usize,
    pub bound_satisfied: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyRecord {
    pub summary: Summary,
    pub checks: Vec<Check>,
    pub pass: bool,
}
