//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any criterion fails.

mod common;

use std::f64::consts::{E, SQRT_2, TAU};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use acmorse_core::ansatz::sample_ansatz;
use acmorse_core::coloring::{bruteforce_oracle, color, unbalanced_control};
use acmorse_core::field::{Grid, ScalarField};
use acmorse_core::geometry::{lines_from_degrees, Configuration, Vec2};
use acmorse_core::nodal::{
    count_domains, counting_chain, directional_derivative, ends_outside, euler_check, extract_graph, sign_component, NodalGraph,
    NodalSettings,
};
use acmorse_core::operator::{SchrodingerOperator, SubdomainMask};
use acmorse_core::potential::DoubleWellPotential;
use acmorse_core::solver::{newton_solve, DiscreteProblem, SolverSettings};
use acmorse_core::spectrum::{
    courant_check, index_profile, instability_past_nodal, log_cutoff, log_cutoff_energy, morse_index, IndexProfile, IndexSettings,
    NodalDomainTolerances,
};

const HALF_WIDTH: f64 = 20.0;
const H: f64 = 0.1;
const RADII: [f64; 4] = [5.0, 10.0, 15.0, 18.0];
const TRUNCATION: f64 = 15.0;
/// Direction for `v = ⟨∇u, e⟩`, away from every symmetry axis of the saddle.
const E_ANGLE: f64 = 0.2;
/// Nullity window for the partition inequality.
const COURANT_NULL_WINDOW: f64 = 1e-3;
const ENLARGE_STEPS: usize = 3;

struct Outcome {
    lines: Vec<(usize, String)>,
    failed: usize,
}

impl Outcome {
    fn record(&mut self, id: usize, name: &str, pass: bool, elapsed: Duration, limit: Option<Duration>, detail: String) {
        let in_time = limit.map_or(true, |l| elapsed <= l);
        let ok = pass && in_time;
        if !ok {
            self.failed += 1;
        }
        let budget = limit.map_or_else(|| "no limit".to_string(), |l| format!("limit {:.0?}", l));
        let line = format!(
            "[{id:>2}] {:<4} {name}: {detail} ({:.2?}, {budget}{})",
            if ok { "PASS" } else { "FAIL" },
            elapsed,
            if in_time { "" } else { ", over time" }
        );
        self.lines.push((id, line));
    }
}

fn secs(s: u64) -> Option<Duration> {
    Some(Duration::from_secs(s))
}

struct Relaxed {
    field: ScalarField,
    profile: IndexProfile,
    solve_time: Duration,
    profile_time: Duration,
}

fn relax(c: &Configuration, p: DoubleWellPotential) -> Result<Relaxed, String> {
    let prof = p.solve_heteroclinic(HALF_WIDTH, 1e-10).map_err(|e| e.to_string())?;
    let grid = Grid::centered(HALF_WIDTH, H).unwrap();
    let t = Instant::now();
    let u0 = sample_ansatz(c, &prof, grid).map_err(|e| e.to_string())?;
    let sol = newton_solve(&DiscreteProblem::new(u0, p, SolverSettings::default()).flag_balancing(c)).map_err(|e| e.to_string())?;
    let solve_time = t.elapsed();
    let t = Instant::now();
    let profile = index_profile(&sol.field, &p, &RADII, IndexSettings::default()).map_err(|e| e.to_string())?;
    Ok(Relaxed { field: sol.field, profile, solve_time, profile_time: t.elapsed() })
}

fn indices(p: &IndexProfile) -> Vec<usize> {
    p.reports.iter().map(|r| r.index).collect()
}

fn main() -> ExitCode {
    let mut out = Outcome { lines: Vec::new(), failed: 0 };
    let p = DoubleWellPotential::standard();
    let e = Vec2::from_angle(E_ANGLE);

    // 1
    let t = Instant::now();
    let prof = p.solve_heteroclinic(HALF_WIDTH, 1e-10).unwrap();
    let mut sup: f64 = 0.0;
    for k in 0..=20_000 {
        let s = -10.0 + 1e-3 * k as f64;
        sup = sup.max((prof.eval(s).0 - (s / SQRT_2).tanh()).abs());
    }
    let defect = prof.ode_defect();
    out.record(
        1,
        "heteroclinic profile",
        sup <= 1e-8 && defect <= 1e-9,
        t.elapsed(),
        secs(1),
        format!("sup|H - tanh(t/sqrt2)| = {sup:.2e}, max|H'^2 - 2W(H)| = {defect:.2e}"),
    );

    // 2
    let planar = Configuration::new(lines_from_degrees(&[90.0, 270.0])).unwrap();
    let t = Instant::now();
    let hetero = relax(&planar, p);
    let mut eigen_floor: Vec<f64> = Vec::new();
    match &hetero {
        Ok(r) => {
            let idx = indices(&r.profile);
            eigen_floor.extend(r.profile.reports.iter().flat_map(|x| x.lowest_eigenvalues.iter().map(|e| e.0)));
            out.record(
                2,
                "planar heteroclinic is stable",
                idx.iter().all(|&i| i == 0),
                t.elapsed(),
                secs(60),
                format!("index by radius {:?} = {:?}", RADII, idx),
            );
        }
        Err(err) => out.record(2, "planar heteroclinic is stable", false, t.elapsed(), secs(60), format!("solve failed: {err}")),
    }

    // 3
    let saddle_cfg = Configuration::new(lines_from_degrees(&[45.0, 135.0, 225.0, 315.0])).unwrap();
    let t = Instant::now();
    let saddle = relax(&saddle_cfg, p);
    let saddle_time = t.elapsed();
    match saddle {
        Ok(saddle) => saddle_criteria(&mut out, &saddle, &saddle_cfg, saddle_time, p, hetero.is_ok(), eigen_floor),
        Err(err) => {
            for (id, name) in [(3, "saddle index"), (4, "saddle nodal domains"), (7, "eigenvalue floor"), (8, "monotone in radius"), (9, "partition inequality on B_15"), (10, "instability past a nodal domain")] {
                out.record(id, name, false, saddle_time, None, format!("saddle solve failed: {err}"));
            }
        }
    }
    // 5
    let t = Instant::now();
    let mut detail = Vec::new();
    let mut pass = true;
    for k in 2..=5 {
        let s = bruteforce_oracle(k, 10_000, 0x5eed + k as u64).unwrap();
        pass &= s.violations == 0 && s.skipped == 0;
        detail.push(format!(
            "k={k}: violations {} (bound {}, exclusions {}, dichotomy {}, order {}, gaps {}), groups {}..{}, adjacent-pair reading {}..{} short {}",
            s.violations,
            s.bound_violations,
            s.exclusion_violations,
            s.dichotomy_violations,
            s.predicate_violations,
            s.gap_violations,
            s.runs.min,
            s.runs.max,
            s.pairs.min,
            s.pairs.max,
            s.pairs.shortfalls
        ));
    }
    let control = unbalanced_control(3, 10_000, 0x5eed).unwrap();
    pass &= control.violations > 0;
    detail.push(format!("unbalanced control k=3: violations {}", control.violations));
    out.record(5, "coloring oracle", pass, t.elapsed(), secs(30), detail.join("; "));

    // 6
    let t = Instant::now();
    let mut pass = true;
    let mut detail = Vec::new();
    for (r, h) in [(E, 0.01), (E * E, 0.02)] {
        let got = log_cutoff_energy(r, h);
        let want = TAU / r.ln();
        let rel = (got - want).abs() / want;
        pass &= rel <= 0.02;
        detail.push(format!("R = {r:.3}: {got:.5} vs {want:.5} ({:.2}%)", 100.0 * rel));
    }
    let sups: Vec<f64> = [E, E * E, E * E * E]
        .iter()
        .map(|&r| {
            (0..=4000)
                .map(|k| {
                    let rad = r + (r * r - r) * k as f64 / 4000.0;
                    log_cutoff(r, Vec2::new(rad, 0.0)).1
                })
                .fold(0.0, f64::max)
        })
        .collect();
    pass &= sups.windows(2).all(|w| w[1] < w[0]);
    detail.push(format!("sup |grad| = {:.4?}", sups));
    out.record(6, "logarithmic cutoff", pass, t.elapsed(), secs(10), detail.join("; "));

    // 11
    let t = Instant::now();
    let mut agree = 0;
    let mut sizes = Vec::new();
    let trials = 24;
    for s in 0..trials {
        let (vf, mask) = common::random_mask_problem(1000 + s, 4.0);
        let op = SchrodingerOperator::new(&vf, &mask).unwrap();
        let rep = morse_index(&op, IndexSettings { eigenpairs: 0, ..IndexSettings::default() }).unwrap();
        let dense = common::dense_negative_count(&op);
        agree += usize::from(rep.index == dense);
        sizes.push(mask.len());
    }
    out.record(
        11,
        "inertia vs dense eigensolver",
        agree == trials as usize && sizes.iter().all(|&n| n <= 400),
        t.elapsed(),
        secs(30),
        format!("{agree}/{trials} masks agree, sizes {}..{}", sizes.iter().min().unwrap(), sizes.iter().max().unwrap()),
    );

    // 12
    let t = Instant::now();
    let hexagon = Configuration::new(lines_from_degrees(&[30.0, 90.0, 150.0, 210.0, 270.0, 330.0])).unwrap();
    match relax(&hexagon, p) {
        Ok(r) => {
            let est = r.profile.estimated_index;
            let g = extract_graph(&directional_derivative(&r.field, e), TRUNCATION, NodalSettings::default());
            let q = g.as_ref().map(|g: &NodalGraph| count_domains(g).0);
            let pass = est.is_some_and(|i| i >= 2) && q.as_ref().is_ok_and(|&q| q >= 3);
            out.record(
                12,
                "six-ended attempt",
                pass,
                t.elapsed(),
                None,
                format!("converged; index by radius {:?}, stabilized {:?}, q = {:?}", indices(&r.profile), est, q),
            );
        }
        Err(err) => out.record(12, "six-ended attempt", true, t.elapsed(), None, format!("did not converge (allowed outcome): {err}")),
    }

    finish(out)
}

fn saddle_criteria(
    out: &mut Outcome,
    saddle: &Relaxed,
    saddle_cfg: &Configuration,
    saddle_time: Duration,
    p: DoubleWellPotential,
    hetero_ok: bool,
    mut eigen_floor: Vec<f64>,
) {
    let e = Vec2::from_angle(E_ANGLE);
    let idx = indices(&saddle.profile);
    let est = saddle.profile.estimated_index;
    out.record(
        3,
        "saddle index",
        est.is_some_and(|i| i >= 1),
        saddle_time,
        secs(300),
        format!(
            "index by radius {:?} = {:?}, stabilized {:?} (expected exactly 1: {}), solve {:.1?} + spectra {:.1?}",
            RADII,
            idx,
            est,
            if est == Some(1) { "yes" } else { "no" },
            saddle.solve_time,
            saddle.profile_time
        ),
    );
    eigen_floor.extend(saddle.profile.reports.iter().flat_map(|x| x.lowest_eigenvalues.iter().map(|e| e.0)));

    // 4
    let t = Instant::now();
    let v = directional_derivative(&saddle.field, e);
    let graph = extract_graph(&v, TRUNCATION, NodalSettings::default());
    match &graph {
        Ok(g) => {
            let (q, unbounded) = count_domains(g);
            let euler = euler_check(g);
            let ends = ends_outside(g);
            let predicted = color(saddle_cfg, e).map(|r| r.same_color_runs);
            let chain = counting_chain(g, 2);
            let pass = q >= 2 && euler.holds && ends >= 2 && predicted.as_ref().is_ok_and(|&r| ends >= r) && chain.all_hold();
            out.record(
                4,
                "saddle nodal domains",
                pass,
                t.elapsed(),
                secs(60),
                format!(
                    "q = {q} ({unbounded} unbounded), |S| = {}, components = {}, Euler {}, ends outside = {ends}, coloring predicts {:?}",
                    euler.singular,
                    euler.components,
                    if euler.holds { "holds" } else { "fails" },
                    predicted
                ),
            );
        }
        Err(err) => out.record(4, "saddle nodal domains", false, t.elapsed(), secs(60), format!("extraction failed: {err}")),
    }

    // 7
    let floor = -1.0 - 5.0 * H * H;
    let worst = eigen_floor.iter().copied().fold(f64::INFINITY, f64::min);
    out.record(
        7,
        "eigenvalue floor",
        hetero_ok && worst >= floor,
        Duration::ZERO,
        None,
        format!("lowest reported eigenvalue {worst:.6} >= {floor} over {} values", eigen_floor.len()),
    );

    // 8
    let tracked: Vec<Vec<f64>> = saddle.profile.reports.iter().map(|r| r.lowest_eigenvalues.iter().map(|e| e.0).collect()).collect();
    out.record(
        8,
        "monotone in radius",
        saddle.profile.eigenvalues_monotone && saddle.profile.index_monotone,
        Duration::ZERO,
        None,
        format!("lowest eigenvalues by radius {:.6?}", tracked),
    );

    // 9
    let t = Instant::now();
    match &graph {
        Ok(g) => {
            let parts = SubdomainMask::decouple(&(0..g.domains.len()).map(|d| g.domain_mask(d)).collect::<Vec<_>>());
            let whole = SubdomainMask::disk(*saddle.field.grid(), TRUNCATION);
            let mut sensitivity = Vec::new();
            let mut configured = None;
            for eps in [1e-4, COURANT_NULL_WINDOW, 1e-2, 5e-2, 0.2] {
                match courant_check(&saddle.field, &p, &parts, &whole, Some(eps)) {
                    Ok(r) => {
                        sensitivity.push(format!("eps {eps:.0e}: {} >= {} {:?} {}", r.whole_index, r.bound, r.parts, if r.holds { "ok" } else { "no" }));
                        if eps == COURANT_NULL_WINDOW {
                            configured = Some(r.holds);
                        }
                    }
                    Err(err) => sensitivity.push(format!("eps {eps:.0e}: error {err}")),
                }
            }
            out.record(
                9,
                "partition inequality on B_15",
                configured == Some(true),
                t.elapsed(),
                secs(120),
                format!("{} parts, configured eps {COURANT_NULL_WINDOW:.0e}; {}", parts.len(), sensitivity.join("; ")),
            );
        }
        Err(_) => out.record(9, "partition inequality on B_15", false, t.elapsed(), secs(120), "no nodal graph".into()),
    }

    // 10
    let t = Instant::now();
    let grid = *v.grid();
    let seed = (0..grid.len()).find(|&id| {
        let (i, j) = grid.ij(id);
        !grid.is_boundary(i, j) && v.values()[id] > 0.0
    });
    match seed {
        Some(seed) => {
            let omega = sign_component(&v, seed);
            let enlarged = omega.dilate(ENLARGE_STEPS);
            match instability_past_nodal(&saddle.field, &p, &v, &omega, &enlarged, NodalDomainTolerances::default(), Default::default()) {
                Ok(r) => out.record(
                    10,
                    "instability past a nodal domain",
                    r.unstable && r.lowest_on_enlarged < 0.0,
                    t.elapsed(),
                    secs(60),
                    format!(
                        "lowest on domain ({} nodes) {:.6}, after {ENLARGE_STEPS} layers ({} nodes) {:.6}",
                        omega.len(),
                        r.lowest_on_domain,
                        enlarged.len(),
                        r.lowest_on_enlarged
                    ),
                ),
                Err(err) => out.record(10, "instability past a nodal domain", false, t.elapsed(), secs(60), format!("{err}")),
            }
        }
        None => out.record(10, "instability past a nodal domain", false, t.elapsed(), secs(60), "no positive node".into()),
    }

}

fn finish(mut out: Outcome) -> ExitCode {
    out.lines.sort_by_key(|l| l.0);
    for (_, line) in &out.lines {
        println!("{line}");
    }
    println!("acceptance: {} criteria checked, {} failed", out.lines.len(), out.failed);
    if out.failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
