//! Nodal set of a directional derivative `v = ⟨∇u, e⟩`: marching-squares
//! contour of `v = 0` inside a truncation disk, singular clusters, nodal
//! domains, and the planar-graph counts built on them.
//!
//! The circle `∂B_R` plays the role of the point at infinity: contour
//! pieces reaching it get an unbounded end, domains touching it are
//! unbounded.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use thiserror::Error;

use crate::field::{Grid, ScalarField};
use crate::geometry::Vec2;
use crate::math::hypot;
use crate::operator::SubdomainMask;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NodalError {
    #[error("truncation radius {radius} does not fit inside the grid (half width {half_width})")]
    GridTooSmall { radius: f64, half_width: f64 },
    #[error("singular cluster at ({x}, {y}) sits on the truncation circle")]
    SingularOnTruncation { x: f64, y: f64 },
    #[error("field is identically zero inside the truncation disk")]
    ZeroField,
}

/// `⟨∇u, e⟩` by central differences; the boundary ring is set to 0 and is
/// not meaningful.
pub fn directional_derivative(u: &ScalarField, e: Vec2) -> ScalarField {
    let g = *u.grid();
    let n = g.n();
    let inv = 0.5 / g.h();
    let v = u.values();
    let mut out = ScalarField::zeros(g);
    let o = out.values_mut();
    for j in 1..n - 1 {
        for i in 1..n - 1 {
            let id = j * n + i;
            o[id] = (e.x * (v[id + 1] - v[id - 1]) + e.y * (v[id + n] - v[id - n])) * inv;
        }
    }
    out
}

/// Thresholds for singular-point detection; `None` picks
/// `10⁻³ ‖v‖∞` and `10⁻² ‖∇v‖∞` over the disk.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct NodalSettings {
    pub eps_v: Option<f64>,
    pub eps_g: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SingularCluster {
    pub position: Vec2,
    pub nodes: Vec<usize>,
    /// Contour ends meeting the cluster.
    pub degree: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    /// Cluster ids at the curve's finite ends (`|∂Γ|` entries).
    pub singular_ends: Vec<usize>,
    /// Ends on the truncation circle.
    pub unbounded_ends: usize,
    /// Closed loop with no ends.
    pub closed: bool,
    pub polyline: Vec<Vec2>,
}

impl Curve {
    /// `|∂Γ|`.
    pub fn end_count(&self) -> usize {
        self.singular_ends.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NodalDomain {
    pub sign: i8,
    pub bounded: bool,
    pub nodes: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NodalGraph {
    pub grid: Grid,
    pub truncation_radius: f64,
    pub eps_v: f64,
    pub eps_g: f64,
    pub singular_points: Vec<SingularCluster>,
    pub curves: Vec<Curve>,
    pub domains: Vec<NodalDomain>,
    /// Smallest `|sin|` of the angle between `∇v` and the radial direction
    /// at contour ends on the circle (1 = perpendicular crossing).
    pub min_crossing_transversality: f64,
}

impl NodalGraph {
    pub fn domain_mask(&self, d: usize) -> SubdomainMask {
        let mut flags = vec![false; self.grid.len()];
        for &p in &self.domains[d].nodes {
            flags[p] = true;
        }
        SubdomainMask::from_flags(self.grid, &flags)
    }

    /// Contour ends meeting singular clusters, counted with multiplicity.
    pub fn incidences(&self) -> usize {
        self.curves.iter().map(Curve::end_count).sum()
    }
}

const NONE: u32 = u32::MAX;

struct Layout {
    grid: Grid,
    radius: f64,
    inside: Vec<bool>,
}

impl Layout {
    fn n(&self) -> usize {
        self.grid.n()
    }

    fn cell_inside(&self, i: usize, j: usize) -> bool {
        let n = self.n();
        let id = j * n + i;
        self.inside[id] && self.inside[id + 1] && self.inside[id + n] && self.inside[id + n + 1]
    }
}

fn positive(x: f64) -> bool {
    x > 0.0
}

/// Extract the truncated nodal graph of `v` on `B_radius`.
pub fn extract_graph(v: &ScalarField, radius: f64, settings: NodalSettings) -> Result<NodalGraph, NodalError> {
    let grid = *v.grid();
    let h = grid.h();
    if !(radius > 2.0 * h) || radius > grid.half_width() - 2.0 * h {
        return Err(NodalError::GridTooSmall { radius, half_width: grid.half_width() });
    }
    let inside: Vec<bool> = (0..grid.len())
        .map(|id| {
            let (i, j) = grid.ij(id);
            !grid.is_boundary(i, j) && grid.point(i, j).norm() < radius
        })
        .collect();
    let layout = Layout { grid, radius, inside };
    let vals = v.values();

    let grad = gradient_norms(v, &layout);
    let vmax = (0..grid.len()).filter(|&id| layout.inside[id]).map(|id| vals[id].abs()).fold(0.0, f64::max);
    if vmax == 0.0 {
        return Err(NodalError::ZeroField);
    }
    let gmax = grad.iter().fold(0.0f64, |m, g| m.max(*g));
    let eps_v = settings.eps_v.unwrap_or(1e-3 * vmax);
    let eps_g = settings.eps_g.unwrap_or(1e-2 * gmax);

    let candidates: Vec<usize> = (0..grid.len())
        .filter(|&id| layout.inside[id] && vals[id].abs() < eps_v && grad[id] < eps_g && ring_sign_changes(vals, &layout, id) >= 4)
        .collect();
    let mut clusters = merge_clusters(&candidates, &grid, 2.0 * h);

    // drop clusters that turn out not to be crossings (fewer than 4 ends)
    let (curves, degrees, transversality) = loop {
        let (curves, degrees, transversality) = trace(vals, &layout, &clusters);
        let keep: Vec<bool> = degrees.iter().map(|&d| d >= 4).collect();
        if keep.iter().all(|&k| k) {
            break (curves, degrees, transversality);
        }
        clusters = clusters.into_iter().zip(keep).filter(|(_, k)| *k).map(|(c, _)| c).collect();
    };
    for c in &clusters {
        let p = c.0;
        if p.norm() > radius - 2.0 * h {
            return Err(NodalError::SingularOnTruncation { x: p.x, y: p.y });
        }
    }

    let blob = blob_flags(&clusters, &layout);
    let domains = flood_domains(vals, &layout, &blob);
    let singular_points = clusters
        .into_iter()
        .zip(degrees)
        .map(|((position, nodes), degree)| SingularCluster { position, nodes, degree })
        .collect();
    Ok(NodalGraph {
        grid,
        truncation_radius: layout.radius,
        eps_v,
        eps_g,
        singular_points,
        curves,
        domains,
        min_crossing_transversality: transversality,
    })
}

fn gradient_norms(v: &ScalarField, layout: &Layout) -> Vec<f64> {
    let g = layout.grid;
    let n = g.n();
    let inv = 0.5 / g.h();
    let vals = v.values();
    let mut out = vec![0.0; g.len()];
    for (id, o) in out.iter_mut().enumerate() {
        if layout.inside[id] {
            let gx = (vals[id + 1] - vals[id - 1]) * inv;
            let gy = (vals[id + n] - vals[id - n]) * inv;
            *o = hypot(gx, gy);
        }
    }
    out
}

/// Sign changes of `v` around the 8-neighbour ring of a node.
fn ring_sign_changes(vals: &[f64], layout: &Layout, id: usize) -> usize {
    let n = layout.n() as isize;
    let ring = [1, n + 1, n, n - 1, -1, -n - 1, -n, -n + 1];
    let s: Vec<bool> = ring.iter().map(|&o| positive(vals[(id as isize + o) as usize])).collect();
    (0..8).filter(|&k| s[k] != s[(k + 1) % 8]).count()
}

fn merge_clusters(candidates: &[usize], grid: &Grid, radius: f64) -> Vec<(Vec2, Vec<usize>)> {
    let mut label = vec![usize::MAX; candidates.len()];
    let mut out = Vec::new();
    for start in 0..candidates.len() {
        if label[start] != usize::MAX {
            continue;
        }
        let id = out.len();
        label[start] = id;
        let mut members = vec![start];
        let mut k = 0;
        while k < members.len() {
            let (ai, aj) = grid.ij(candidates[members[k]]);
            let a = grid.point(ai, aj);
            for (other, l) in label.iter_mut().enumerate() {
                if *l == usize::MAX {
                    let (bi, bj) = grid.ij(candidates[other]);
                    if (grid.point(bi, bj) - a).norm() <= radius + 1e-9 {
                        *l = id;
                        members.push(other);
                    }
                }
            }
            k += 1;
        }
        let nodes: Vec<usize> = members.iter().map(|&m| candidates[m]).collect();
        let mut c = Vec2::ZERO;
        for &p in &nodes {
            let (i, j) = grid.ij(p);
            c = c + grid.point(i, j);
        }
        out.push(((1.0 / nodes.len() as f64) * c, nodes));
    }
    out
}

/// Cluster id owning each cell (cells with a cluster node as a corner).
fn singular_cells(clusters: &[(Vec2, Vec<usize>)], layout: &Layout) -> Vec<u32> {
    let n = layout.n();
    let mut owner = vec![NONE; n * n];
    for (c, (_, nodes)) in clusters.iter().enumerate() {
        for &p in nodes {
            let (i, j) = layout.grid.ij(p);
            for (ci, cj) in [(i.wrapping_sub(1), j.wrapping_sub(1)), (i, j.wrapping_sub(1)), (i.wrapping_sub(1), j), (i, j)] {
                if ci < n - 1 && cj < n - 1 {
                    owner[cj * n + ci] = c as u32;
                }
            }
        }
    }
    owner
}

/// Corners of singular cells.
fn blob_flags(clusters: &[(Vec2, Vec<usize>)], layout: &Layout) -> Vec<bool> {
    let n = layout.n();
    let owner = singular_cells(clusters, layout);
    let mut blob = vec![false; n * n];
    for j in 0..n - 1 {
        for i in 0..n - 1 {
            if owner[j * n + i] != NONE {
                let id = j * n + i;
                for c in [id, id + 1, id + n, id + n + 1] {
                    blob[c] = true;
                }
            }
        }
    }
    blob
}

#[derive(Clone, Copy, PartialEq)]
enum Terminal {
    Singular(u32),
    Infinity,
}

/// Edge ids: horizontal edge from node `id` is `2 id`, vertical `2 id + 1`.
fn crossing_point(vals: &[f64], grid: &Grid, edge: usize) -> Vec2 {
    let id = edge / 2;
    let n = grid.n();
    let other = if edge % 2 == 0 { id + 1 } else { id + n };
    let (a, b) = (vals[id], vals[other]);
    let t = if a == b { 0.5 } else { a / (a - b) };
    let (i, j) = grid.ij(id);
    let p = grid.point(i, j);
    let h = grid.h();
    if edge % 2 == 0 {
        Vec2::new(p.x + t * h, p.y)
    } else {
        Vec2::new(p.x, p.y + t * h)
    }
}

type Traced = (Vec<Curve>, Vec<usize>, f64);

fn trace(vals: &[f64], layout: &Layout, clusters: &[(Vec2, Vec<usize>)]) -> Traced {
    let grid = layout.grid;
    let n = grid.n();
    let owner = singular_cells(clusters, layout);
    let mut links: Vec<[u32; 2]> = vec![[NONE; 2]; 2 * n * n];
    let mut active = vec![false; 2 * n * n];
    let add = |a: usize, b: usize, links: &mut Vec<[u32; 2]>| {
        for (x, y) in [(a, b), (b, a)] {
            let slot = if links[x][0] == NONE { 0 } else { 1 };
            links[x][slot] = y as u32;
        }
    };

    for j in 0..n - 1 {
        for i in 0..n - 1 {
            let cell = j * n + i;
            if !layout.cell_inside(i, j) || owner[cell] != NONE {
                continue;
            }
            let (a, b, c, d) = (cell, cell + 1, cell + n + 1, cell + n);
            let s = [positive(vals[a]), positive(vals[b]), positive(vals[c]), positive(vals[d])];
            let bottom = 2 * a;
            let right = 2 * b + 1;
            let top = 2 * d;
            let left = 2 * a + 1;
            let edges = [(bottom, s[0] != s[1]), (right, s[1] != s[2]), (top, s[3] != s[2]), (left, s[0] != s[3])];
            let crossing: Vec<usize> = edges.iter().filter(|e| e.1).map(|e| e.0).collect();
            for &e in &crossing {
                active[e] = true;
            }
            match crossing.len() {
                2 => add(crossing[0], crossing[1], &mut links),
                4 => {
                    let centre = 0.25 * (vals[a] + vals[b] + vals[c] + vals[d]);
                    if positive(centre) == s[0] {
                        // a and c joined through the centre
                        add(bottom, right, &mut links);
                        add(top, left, &mut links);
                    } else {
                        add(bottom, left, &mut links);
                        add(right, top, &mut links);
                    }
                }
                _ => {}
            }
        }
    }

    // what lies beyond a dangling crossing: a singular cell or the circle
    let terminal_of = |edge: usize| -> Terminal {
        let id = edge / 2;
        let (i, j) = grid.ij(id);
        let cells: [(isize, isize); 2] = if edge % 2 == 0 {
            [(i as isize, j as isize - 1), (i as isize, j as isize)]
        } else {
            [(i as isize - 1, j as isize), (i as isize, j as isize)]
        };
        for (ci, cj) in cells {
            if ci >= 0 && cj >= 0 && (ci as usize) < n - 1 && (cj as usize) < n - 1 {
                let cell = cj as usize * n + ci as usize;
                if owner[cell] != NONE && layout.cell_inside(ci as usize, cj as usize) {
                    return Terminal::Singular(owner[cell]);
                }
            }
        }
        Terminal::Infinity
    };

    let mut degrees = vec![0usize; clusters.len()];
    let mut visited = vec![false; 2 * n * n];
    let mut curves = Vec::new();
    let mut transversality: f64 = 1.0;
    let mut record_end = |t: Terminal, edge: usize, curve: &mut Curve, degrees: &mut Vec<usize>| match t {
        Terminal::Singular(c) => {
            degrees[c as usize] += 1;
            curve.singular_ends.push(c as usize);
        }
        Terminal::Infinity => {
            curve.unbounded_ends += 1;
            let p = crossing_point(vals, &grid, edge);
            let id = edge / 2;
            let other = if edge % 2 == 0 { id + 1 } else { id + n };
            let dv = vals[other] - vals[id];
            let g = if edge % 2 == 0 { Vec2::new(dv, 0.0) } else { Vec2::new(0.0, dv) };
            let r = p.norm();
            if r > 0.0 && g.norm() > 0.0 {
                let s = (g.cross(p) / (g.norm() * r)).abs();
                transversality = transversality.min(s);
            }
        }
    };

    // open curves start at dangling crossings
    for start in 0..2 * n * n {
        if !active[start] || visited[start] || links[start][1] != NONE {
            continue;
        }
        let mut curve = Curve { singular_ends: Vec::new(), unbounded_ends: 0, closed: false, polyline: Vec::new() };
        record_end(terminal_of(start), start, &mut curve, &mut degrees);
        let mut prev = NONE;
        let mut cur = start as u32;
        loop {
            visited[cur as usize] = true;
            curve.polyline.push(crossing_point(vals, &grid, cur as usize));
            let l = links[cur as usize];
            let next = if l[0] != prev { l[0] } else { l[1] };
            if next == NONE {
                break;
            }
            prev = cur;
            cur = next;
        }
        record_end(terminal_of(cur as usize), cur as usize, &mut curve, &mut degrees);
        curves.push(curve);
    }
    // what remains are closed loops
    for start in 0..2 * n * n {
        if !active[start] || visited[start] {
            continue;
        }
        let mut curve = Curve { singular_ends: Vec::new(), unbounded_ends: 0, closed: true, polyline: Vec::new() };
        let mut prev = NONE;
        let mut cur = start as u32;
        while !visited[cur as usize] {
            visited[cur as usize] = true;
            curve.polyline.push(crossing_point(vals, &grid, cur as usize));
            let l = links[cur as usize];
            let next = if l[0] != prev { l[0] } else { l[1] };
            prev = cur;
            cur = next;
        }
        curves.push(curve);
    }
    (curves, degrees, transversality)
}

fn flood_domains(vals: &[f64], layout: &Layout, blob: &[bool]) -> Vec<NodalDomain> {
    let grid = layout.grid;
    let n = grid.n();
    let usable = |id: usize| layout.inside[id] && !blob[id];
    let mut label = vec![NONE; n * n];
    let mut domains = Vec::new();
    let mut queue = VecDeque::new();
    for seed in 0..n * n {
        if !usable(seed) || label[seed] != NONE {
            continue;
        }
        let id = domains.len() as u32;
        let sign = positive(vals[seed]);
        let mut nodes = Vec::new();
        let mut bounded = true;
        label[seed] = id;
        queue.push_back(seed);
        while let Some(p) = queue.pop_front() {
            nodes.push(p);
            let (i, j) = grid.ij(p);
            let try_push = |q: usize, label: &mut Vec<u32>, queue: &mut VecDeque<usize>| {
                if usable(q) && label[q] == NONE && positive(vals[q]) == sign {
                    label[q] = id;
                    queue.push_back(q);
                }
            };
            for q in [p - 1, p + 1, p - n, p + n] {
                if !layout.inside[q] {
                    bounded = false;
                }
                try_push(q, &mut label, &mut queue);
            }
            // diagonals inside saddle cells, following the centre value
            for (di, dj) in [(-1isize, -1isize), (1, -1), (-1, 1), (1, 1)] {
                let ci = if di < 0 { i - 1 } else { i };
                let cj = if dj < 0 { j - 1 } else { j };
                if !layout.cell_inside(ci, cj) {
                    continue;
                }
                let c = cj * n + ci;
                let corners = [c, c + 1, c + n + 1, c + n];
                let s: Vec<bool> = corners.iter().map(|&k| positive(vals[k])).collect();
                let saddle = s[0] == s[2] && s[1] == s[3] && s[0] != s[1];
                if !saddle {
                    continue;
                }
                let centre = 0.25 * corners.iter().map(|&k| vals[k]).sum::<f64>();
                if positive(centre) == sign {
                    let q = (p as isize + di + dj * n as isize) as usize;
                    try_push(q, &mut label, &mut queue);
                }
            }
        }
        nodes.sort_unstable();
        domains.push(NodalDomain { sign: if sign { 1 } else { -1 }, bounded, nodes });
    }
    domains
}

/// The 4-connected component of `{sign(v) = sign(v(seed))}` containing
/// `seed`, over all nodes off the boundary ring.
pub fn sign_component(v: &ScalarField, seed: usize) -> SubdomainMask {
    let grid = *v.grid();
    let vals = v.values();
    let sign = positive(vals[seed]);
    let mut flags = vec![false; grid.len()];
    let mut queue = VecDeque::new();
    let usable = |id: usize| {
        let (i, j) = grid.ij(id);
        !grid.is_boundary(i, j) && vals[id] != 0.0 && positive(vals[id]) == sign
    };
    if usable(seed) {
        flags[seed] = true;
        queue.push_back(seed);
    }
    while let Some(p) = queue.pop_front() {
        for q in SubdomainMask::neighbours(&grid, p) {
            if !flags[q] && usable(q) {
                flags[q] = true;
                queue.push_back(q);
            }
        }
    }
    SubdomainMask::from_flags(grid, &flags)
}

/// `(q, p)`: nodal domains and unbounded ones.
pub fn count_domains(g: &NodalGraph) -> (usize, usize) {
    (g.domains.len(), g.domains.iter().filter(|d| !d.bounded).count())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EulerReport {
    pub q: usize,
    pub components: usize,
    pub singular: usize,
    pub holds: bool,
}

/// `q = 1 + |components of N ∖ S| − |S|` on the truncated graph.
pub fn euler_check(g: &NodalGraph) -> EulerReport {
    let q = g.domains.len();
    let components = g.curves.len();
    let singular = g.singular_points.len();
    EulerReport { q, components, singular, holds: q + singular == 1 + components }
}

/// Contour ends on the truncation circle, i.e. components of `N` outside the disk.
pub fn ends_outside(g: &NodalGraph) -> usize {
    g.curves.iter().map(|c| c.unbounded_ends).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChainReport {
    pub k: usize,
    /// Curves with `|∂Γ| = 0, 1, 2`.
    pub by_end_count: [usize; 3],
    pub incidences: usize,
    pub singular: usize,
    pub q: usize,
    pub ends: usize,
    /// At least `2k − 2` unbounded ends were seen.
    pub hypothesis_ok: bool,
    /// `2k − 2 ≤ Σ (2 − ℓ) · count_ℓ`.
    pub ends_bound: bool,
    /// `|A| ≥ 2 |S|`.
    pub incidence_bound: bool,
    /// `q ≥ k + ½|A| − |S|`.
    pub domain_bound: bool,
    /// `q ≥ k`.
    pub q_at_least_k: bool,
}

impl ChainReport {
    pub fn all_hold(&self) -> bool {
        self.hypothesis_ok && self.ends_bound && self.incidence_bound && self.domain_bound && self.q_at_least_k
    }
}

/// Run the end-counting chain for a `2k`-ended solution.
pub fn counting_chain(g: &NodalGraph, k: usize) -> ChainReport {
    let mut by_end_count = [0usize; 3];
    for c in &g.curves {
        by_end_count[c.end_count().min(2)] += 1;
    }
    let incidences = g.incidences();
    let singular = g.singular_points.len();
    let q = g.domains.len();
    let ends = ends_outside(g);
    let need = 2 * k - 2;
    let free: usize = (0..3).map(|l| (2 - l) * by_end_count[l]).sum();
    ChainReport {
        k,
        by_end_count,
        incidences,
        singular,
        q,
        ends,
        hypothesis_ok: ends >= need,
        ends_bound: need <= free,
        incidence_bound: incidences >= 2 * singular,
        domain_bound: 2 * q + 2 * singular >= 2 * k + incidences,
        q_at_least_k: q >= k,
    }
}

/// Domain, curve and cluster counts with both thresholds scaled by each factor.
pub fn threshold_sensitivity(v: &ScalarField, radius: f64, base: &NodalGraph, factors: &[f64]) -> Vec<(f64, Result<(usize, usize, usize), NodalError>)> {
    factors
        .iter()
        .map(|&f| {
            let s = NodalSettings { eps_v: Some(f * base.eps_v), eps_g: Some(f * base.eps_g) };
            (f, extract_graph(v, radius, s).map(|g| (g.domains.len(), g.curves.len(), g.singular_points.len())))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::exp;

    fn field(half: f64, h: f64, f: impl Fn(f64, f64) -> f64) -> ScalarField {
        ScalarField::from_fn(Grid::centered(half, h).unwrap(), |p| f(p.x, p.y))
    }

    #[test]
    fn saddle_polynomial() {
        let v = field(2.0, 0.05, |x, y| x * x - y * y);
        let g = extract_graph(&v, 1.8, NodalSettings::default()).unwrap();
        assert_eq!(g.singular_points.len(), 1);
        assert_eq!(g.singular_points[0].degree, 4);
        assert!(g.singular_points[0].position.norm() < 1e-12);
        assert_eq!(g.curves.len(), 4);
        assert!(g.curves.iter().all(|c| c.end_count() == 1 && c.unbounded_ends == 1));
        assert_eq!(count_domains(&g), (4, 4));
        let e = euler_check(&g);
        assert!(e.holds, "{e:?}");
        assert_eq!(ends_outside(&g), 4);
        let chain = counting_chain(&g, 2);
        assert_eq!(chain.incidences, 4);
        assert!(chain.all_hold(), "{chain:?}");
    }

    #[test]
    fn linear_field() {
        let v = field(2.0, 0.1, |x, _| x);
        let g = extract_graph(&v, 1.5, NodalSettings::default()).unwrap();
        assert!(g.singular_points.is_empty());
        assert_eq!(g.curves.len(), 1);
        assert_eq!(g.curves[0].unbounded_ends, 2);
        assert_eq!(count_domains(&g), (2, 2));
        assert!(euler_check(&g).holds);
        assert_eq!(ends_outside(&g), 2);
        let chain = counting_chain(&g, 2);
        assert_eq!(chain.incidences, 0);
        assert!(chain.all_hold());
    }

    #[test]
    fn cubic_harmonic_with_bump() {
        // Re (x + iy)^3 has six nodal rays through the origin
        let v = field(2.0, 0.02, |x, y| (x * x * x - 3.0 * x * y * y) * exp(-(x * x + y * y)));
        let g = extract_graph(&v, 1.7, NodalSettings::default()).unwrap();
        assert_eq!(g.singular_points.len(), 1);
        assert_eq!(g.singular_points[0].degree, 6);
        assert_eq!(g.curves.len(), 6);
        assert_eq!(count_domains(&g), (6, 6));
        assert!(euler_check(&g).holds);
        assert_eq!(ends_outside(&g), 6);
    }

    #[test]
    fn circle_gives_bounded_domain() {
        let v = field(2.0, 0.05, |x, y| x * x + y * y - 1.0);
        let g = extract_graph(&v, 1.8, NodalSettings::default()).unwrap();
        assert_eq!(g.curves.len(), 1);
        assert!(g.curves[0].closed);
        assert_eq!(count_domains(&g), (2, 1));
        assert!(euler_check(&g).holds);
        assert_eq!(ends_outside(&g), 0);
    }

    #[test]
    fn adjacent_domains_have_opposite_signs() {
        let v = field(2.0, 0.05, |x, y| x * x - y * y + 0.3 * x * y);
        let g = extract_graph(&v, 1.8, NodalSettings::default()).unwrap();
        let grid = g.grid;
        let mut label = vec![usize::MAX; grid.len()];
        for (d, dom) in g.domains.iter().enumerate() {
            for &p in &dom.nodes {
                label[p] = d;
            }
        }
        for p in 0..grid.len() {
            if label[p] == usize::MAX {
                continue;
            }
            for q in SubdomainMask::neighbours(&grid, p) {
                if label[q] != usize::MAX && label[q] != label[p] {
                    assert_ne!(g.domains[label[p]].sign, g.domains[label[q]].sign);
                }
            }
        }
    }

    #[test]
    fn derivative_of_planar_profile() {
        let u = field(3.0, 0.1, |x, _| crate::math::tanh(x));
        let along = directional_derivative(&u, Vec2::new(0.0, 1.0));
        assert_eq!(along.max_abs(), 0.0);
        let across = directional_derivative(&u, Vec2::new(1.0, 0.0));
        let g = *across.grid();
        for j in 1..g.n() - 1 {
            for i in 1..g.n() - 1 {
                assert!(across.at(i, j) > 0.0);
            }
        }
    }

    #[test]
    fn sign_component_fills_half_plane() {
        let v = field(2.0, 0.1, |x, y| x - 0.3 * y + 0.05);
        let g = *v.grid();
        let seed = g.idx(g.n() - 2, g.n() / 2);
        let m = sign_component(&v, seed);
        let expect = (0..g.len())
            .filter(|&id| {
                let (i, j) = g.ij(id);
                !g.is_boundary(i, j) && v.values()[id] > 0.0
            })
            .count();
        assert_eq!(m.len(), expect);
        assert!(m.is_connected());
    }

    #[test]
    fn truncation_must_fit() {
        let v = field(2.0, 0.1, |x, _| x);
        assert!(matches!(extract_graph(&v, 1.95, NodalSettings::default()), Err(NodalError::GridTooSmall { .. })));
    }
}
