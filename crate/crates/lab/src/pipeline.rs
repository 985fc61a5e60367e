//! Stage-by-stage pipeline from a configuration to summary artifacts.

use std::fmt;
use std::path::{Path, PathBuf};
use std::time::Instant;

use acmorse_core::ansatz::sample_ansatz;
use acmorse_core::coloring::{bruteforce_oracle, color, group_check};
use acmorse_core::eigen::LanczosSettings;
use acmorse_core::field::{Grid, ScalarField};
use acmorse_core::geometry::{Configuration, Vec2};
use acmorse_core::nodal::{
    counting_chain, directional_derivative, ends_outside, euler_check, extract_graph, sign_component, ChainReport, EulerReport, NodalGraph,
    NodalSettings,
};
use acmorse_core::operator::SubdomainMask;
use acmorse_core::potential::{DoubleWellPotential, HeteroclinicProfile};
use acmorse_core::solver::{newton_solve, DiscreteProblem, SolveError, Solution};
use acmorse_core::spectrum::{
    courant_check, eigenvalue_floor_check, index_profile, instability_past_nodal, log_cutoff, log_cutoff_energy, potential_min_on,
    IndexProfile, IndexSettings, NodalDomainTolerances,
};
use thiserror::Error;

use crate::config::ExperimentConfig;
use crate::formats::{self, FormatError};
use crate::records::{Check, ColoringArtifact, ColoringRecord, NodalRecord, OracleRecord, SpectraRecord, Summary, VerifyRecord};

/// Largest `k` the coloring oracle accepts.
pub const ORACLE_MAX_K: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Output,
    Configuration,
    Profile,
    Ansatz,
    Solve,
    Spectrum,
    Nodal,
    Coloring,
    Summary,
    Verify,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::Output => "output",
            Stage::Configuration => "configuration",
            Stage::Profile => "heteroclinic",
            Stage::Ansatz => "ansatz",
            Stage::Solve => "solve",
            Stage::Spectrum => "spectrum",
            Stage::Nodal => "nodal",
            Stage::Coloring => "coloring",
            Stage::Summary => "summary",
            Stage::Verify => "verify",
        })
    }
}

#[derive(Debug, Error)]
#[error("stage `{stage}` failed: {message}")]
pub struct StageError {
    pub stage: Stage,
    pub message: String,
}

fn fail<E: fmt::Display>(stage: Stage) -> impl FnOnce(E) -> StageError {
    move |e| StageError { stage, message: e.to_string() }
}

/// Artifact file names inside the output directory.
pub mod files {
    pub const SUMMARY: &str = "summary.json";
    pub const FIELD_BIN: &str = "field.bin";
    pub const FIELD_CSV: &str = "field.csv";
    pub const ANSATZ_BIN: &str = "ansatz.bin";
    pub const ANSATZ_CSV: &str = "ansatz.csv";
    pub const ITERATIONS: &str = "iterations.csv";
    pub const SPECTRA: &str = "spectra.json";
    pub const NODAL: &str = "nodal.json";
    pub const COLORING: &str = "coloring.json";
    pub const VERIFY: &str = "verify.json";
}

/// Progress callback; receives one human-readable line per finished stage.
pub type Progress<'a> = &'a mut dyn FnMut(Stage, &str);

/// Resolved inputs shared by every stage.
pub struct Experiment {
    pub cfg: ExperimentConfig,
    pub potential: DoubleWellPotential,
    pub configuration: Configuration,
    pub grid: Grid,
}

impl Experiment {
    pub fn new(cfg: ExperimentConfig) -> Result<Self, StageError> {
        let potential = cfg.potential().map_err(fail(Stage::Configuration))?;
        let configuration = formats::load_configuration(&cfg.experiment.configuration).map_err(fail(Stage::Configuration))?;
        let grid = Grid::centered(cfg.grid.half_width, cfg.grid.h).map_err(fail(Stage::Configuration))?;
        Ok(Self { cfg, potential, configuration, grid })
    }

    pub fn output(&self) -> &Path {
        &self.cfg.experiment.output
    }

    pub fn artifact(&self, name: &str) -> PathBuf {
        self.output().join(name)
    }

    pub fn create_output(&self) -> Result<(), StageError> {
        std::fs::create_dir_all(self.output()).map_err(|e| StageError { stage: Stage::Output, message: format!("{}: {e}", self.output().display()) })
    }

    fn lanczos(&self) -> LanczosSettings {
        LanczosSettings { seed: self.cfg.experiment.seed, ..LanczosSettings::default() }
    }

    pub fn direction(&self) -> Vec2 {
        Vec2::from_angle(self.cfg.nodal.direction)
    }

    pub fn profile(&self) -> Result<HeteroclinicProfile, StageError> {
        self.potential.solve_heteroclinic(self.cfg.grid.half_width.max(5.0), self.cfg.solver.profile_tol).map_err(fail(Stage::Profile))
    }

    pub fn ansatz(&self, profile: &HeteroclinicProfile) -> Result<ScalarField, StageError> {
        sample_ansatz(&self.configuration, profile, self.grid).map_err(fail(Stage::Ansatz))
    }

    /// Relax the ansatz; writes the iteration log whether or not it converges,
    /// and the field when it does.
    pub fn solve(&self, initial: ScalarField) -> Result<Solution, StageError> {
        let problem = DiscreteProblem::new(initial, self.potential, self.cfg.solver.settings()).flag_balancing(&self.configuration);
        let log_path = self.artifact(files::ITERATIONS);
        match newton_solve(&problem) {
            Ok(sol) => {
                formats::save_iteration_log(&log_path, &sol.log).map_err(fail(Stage::Solve))?;
                formats::save_field_bin(&self.artifact(files::FIELD_BIN), &sol.field).map_err(fail(Stage::Solve))?;
                formats::save_field_csv(&self.artifact(files::FIELD_CSV), &sol.field).map_err(fail(Stage::Solve))?;
                Ok(sol)
            }
            Err(err) => {
                if let SolveError::NotConverged { log, .. } = &err {
                    formats::save_iteration_log(&log_path, log).map_err(fail(Stage::Solve))?;
                }
                Err(fail(Stage::Solve)(err))
            }
        }
    }

    pub fn spectrum(&self, u: &ScalarField) -> Result<IndexProfile, StageError> {
        let settings = IndexSettings { null_window: self.cfg.spectrum.null_window, eigenpairs: self.cfg.spectrum.eigenpairs, lanczos: self.lanczos() };
        let profile = index_profile(u, &self.potential, &self.cfg.spectrum.radii, settings).map_err(fail(Stage::Spectrum))?;
        formats::save_json(&self.artifact(files::SPECTRA), &SpectraRecord::from(&profile)).map_err(fail(Stage::Spectrum))?;
        Ok(profile)
    }

    pub fn nodal(&self, u: &ScalarField) -> Result<NodalOutcome, StageError> {
        let e = self.direction();
        let v = directional_derivative(u, e);
        let settings = NodalSettings { eps_v: self.cfg.nodal.eps_v, eps_g: self.cfg.nodal.eps_g };
        let graph = extract_graph(&v, self.cfg.nodal.truncation, settings).map_err(fail(Stage::Nodal))?;
        let ends = ends_outside(&graph);
        let euler = euler_check(&graph);
        let chain = counting_chain(&graph, self.configuration.k());
        let record = NodalRecord::new(&graph, [e.x, e.y], ends, &euler, &chain);
        formats::save_json(&self.artifact(files::NODAL), &record).map_err(fail(Stage::Nodal))?;
        Ok(NodalOutcome { v, graph, ends, euler, chain })
    }

    pub fn coloring(&self) -> Result<ColoringArtifact, StageError> {
        let report = color(&self.configuration, self.direction()).map_err(fail(Stage::Coloring))?;
        let groups = group_check(&report);
        let k = self.configuration.k();
        let oracle = if (2..=ORACLE_MAX_K).contains(&k) {
            let seed = self.cfg.experiment.seed;
            let stats = bruteforce_oracle(k, self.cfg.coloring.trials, seed).map_err(fail(Stage::Coloring))?;
            Some(OracleRecord::new(&stats, seed))
        } else {
            None
        };
        let artifact = ColoringArtifact { configuration: ColoringRecord::new(&report, &groups), oracle };
        formats::save_json(&self.artifact(files::COLORING), &artifact).map_err(fail(Stage::Coloring))?;
        Ok(artifact)
    }
}

pub struct NodalOutcome {
    /// `⟨∇u, e⟩`.
    pub v: ScalarField,
    pub graph: NodalGraph,
    pub ends: usize,
    pub euler: EulerReport,
    pub chain: ChainReport,
}

pub struct PipelineOutcome {
    pub summary: Summary,
    pub solution: Solution,
    pub spectra: IndexProfile,
    pub nodal: NodalOutcome,
    pub coloring: ColoringArtifact,
}

/// `estimated_index ≥ k − 1` and `q ≥ k`.
pub fn summarize(k: usize, spectra: &IndexProfile, nodal: &NodalOutcome) -> Summary {
    let q = nodal.graph.domains.len();
    let estimated_index = spectra.estimated_index;
    Summary { k, estimated_index, q, ends: nodal.ends, bound_satisfied: estimated_index.is_some_and(|i| i + 1 >= k) && q >= k }
}

fn timed<T>(stage: Stage, progress: &mut dyn FnMut(Stage, &str), f: impl FnOnce() -> Result<(T, String), StageError>) -> Result<T, StageError> {
    let t = Instant::now();
    let (value, line) = f()?;
    progress(stage, &format!("{line} ({:.1?})", t.elapsed()));
    Ok(value)
}

/// ansatz → solve → spectrum → nodal → coloring, then `summary.json`.
/// Files written by earlier stages stay in place when a later one fails.
pub fn run_pipeline(ex: &Experiment, progress: Progress<'_>) -> Result<PipelineOutcome, StageError> {
    ex.create_output()?;
    let profile = timed(Stage::Profile, progress, || {
        let p = ex.profile()?;
        Ok((p, "heteroclinic profile ready".into()))
    })?;
    let initial = timed(Stage::Ansatz, progress, || {
        let u = ex.ansatz(&profile)?;
        Ok((u, format!("ansatz on {0}x{0} nodes, R = {1}", ex.grid.n(), ex.configuration.radius())))
    })?;
    let solution = timed(Stage::Solve, progress, || {
        let s = ex.solve(initial)?;
        let warn = s.balancing_warning.map_or_else(String::new, |d| format!(", unbalanced ends |sum f| = {d:.3e}"));
        let line = format!("converged in {} iterations{warn}", s.log.last().map_or(0, |r| r.iter));
        Ok((s, line))
    })?;
    let spectra = timed(Stage::Spectrum, progress, || {
        let p = ex.spectrum(&solution.field)?;
        let idx: Vec<usize> = p.reports.iter().map(|r| r.index).collect();
        let line = format!("index by radius {:?} = {idx:?}, stabilized {:?}", ex.cfg.spectrum.radii, p.estimated_index);
        Ok((p, line))
    })?;
    let nodal = timed(Stage::Nodal, progress, || {
        let n = ex.nodal(&solution.field)?;
        let line = format!("q = {}, singular points {}, ends outside {}", n.graph.domains.len(), n.graph.singular_points.len(), n.ends);
        Ok((n, line))
    })?;
    let coloring = timed(Stage::Coloring, progress, || {
        let c = ex.coloring()?;
        let line = format!(
            "{} same-color groups{}",
            c.configuration.same_color_runs,
            c.oracle.as_ref().map_or_else(String::new, |o| format!(", oracle {} violations in {} trials", o.violations, o.trials))
        );
        Ok((c, line))
    })?;
    let summary = summarize(ex.configuration.k(), &spectra, &nodal);
    formats::save_json(&ex.artifact(files::SUMMARY), &summary).map_err(fail(Stage::Summary))?;
    Ok(PipelineOutcome { summary, solution, spectra, nodal, coloring })
}

fn check(name: &str, pass: bool, detail: String) -> Check {
    Check { name: name.into(), pass, detail }
}

/// Runs the pipeline, then the auxiliary spectral and nodal checks on its
/// output; writes `verify.json`.
pub fn verify(ex: &Experiment, progress: Progress<'_>) -> Result<VerifyRecord, StageError> {
    let out = run_pipeline(ex, progress)?;
    let t = Instant::now();
    let u = &out.solution.field;
    let p = &ex.potential;
    let mut checks = Vec::new();

    let s = &out.summary;
    checks.push(check(
        "index and domain bound",
        s.bound_satisfied,
        format!("k = {}, estimated index {:?}, q = {}", s.k, s.estimated_index, s.q),
    ));

    let n = &out.nodal;
    checks.push(check(
        "nodal counting chain",
        n.euler.holds && n.chain.all_hold(),
        format!(
            "q = {}, |S| = {}, components = {}, incidences = {}, ends = {}",
            n.euler.q, n.euler.singular, n.euler.components, n.chain.incidences, n.chain.ends
        ),
    ));

    let cr = &out.coloring.configuration;
    let changes = cr.colors.len() - cr.same_color_adjacencies;
    checks.push(check(
        "nodal ends match color changes",
        n.ends >= changes,
        format!("ends outside {} vs color changes {changes}", n.ends),
    ));

    if let Some(o) = &out.coloring.oracle {
        checks.push(check(
            "coloring oracle",
            o.violations == 0 && o.skipped == 0,
            format!("k = {}, {} trials, {} violations, fewest groups {}", o.k, o.trials, o.violations, o.min_adjacency),
        ));
    }

    let wpp = u.map(|x| p.ddw(x));
    let mut floor_ok = true;
    let mut lowest = f64::INFINITY;
    for r in &out.spectra.reports {
        let radius = r.radius.unwrap_or(ex.grid.half_width());
        let floor = potential_min_on(&wpp, &SubdomainMask::disk(ex.grid, radius));
        floor_ok &= eigenvalue_floor_check(r, floor, 1e-8).is_ok();
        lowest = r.lowest_eigenvalues.iter().map(|e| e.0).fold(lowest, f64::min);
    }
    checks.push(check("eigenvalue floor", floor_ok, format!("lowest reported eigenvalue {lowest:.6}")));

    checks.push(check(
        "monotone in radius",
        out.spectra.index_monotone && out.spectra.eigenvalues_monotone,
        format!("index monotone {}, eigenvalues monotone {}", out.spectra.index_monotone, out.spectra.eigenvalues_monotone),
    ));

    checks.push(cutoff_check());
    checks.push(partition_check(ex, u, &n.graph));
    checks.push(instability_check(ex, u, n));

    let pass = checks.iter().all(|c| c.pass);
    progress(Stage::Verify, &format!("{} of {} checks pass ({:.1?})", checks.iter().filter(|c| c.pass).count(), checks.len(), t.elapsed()));
    let record = VerifyRecord { summary: out.summary, checks, pass };
    formats::save_json(&ex.artifact(files::VERIFY), &record).map_err(fail(Stage::Verify))?;
    Ok(record)
}

fn cutoff_check() -> Check {
    use std::f64::consts::{E, TAU};
    let mut pass = true;
    let mut detail = Vec::new();
    for (r, h) in [(E, 0.01), (E * E, 0.02)] {
        let got = log_cutoff_energy(r, h);
        let want = TAU / r.ln();
        let rel = (got - want).abs() / want;
        pass &= rel <= 0.02;
        detail.push(format!("R = {r:.3}: {got:.5} vs {want:.5}"));
    }
    let sups: Vec<f64> = [E, E * E, E * E * E]
        .iter()
        .map(|&r| (0..=4000).map(|k| log_cutoff(r, Vec2::new(r + (r * r - r) * k as f64 / 4000.0, 0.0)).1).fold(0.0, f64::max))
        .collect();
    pass &= sups.windows(2).all(|w| w[1] < w[0]);
    detail.push(format!("sup |grad| {sups:.4?}"));
    check("logarithmic cutoff", pass, detail.join("; "))
}

fn partition_check(ex: &Experiment, u: &ScalarField, g: &NodalGraph) -> Check {
    let parts = SubdomainMask::decouple(&(0..g.domains.len()).map(|d| g.domain_mask(d)).collect::<Vec<_>>());
    let whole = SubdomainMask::disk(ex.grid, ex.cfg.nodal.truncation);
    match courant_check(u, &ex.potential, &parts, &whole, Some(ex.cfg.verify.courant_null_window)) {
        Ok(r) => check(
            "partition inequality",
            r.holds,
            format!("index {} >= {} from parts {:?} (window {:.0e})", r.whole_index, r.bound, r.parts, r.null_window),
        ),
        Err(e) => check("partition inequality", false, e.to_string()),
    }
}

fn instability_check(ex: &Experiment, u: &ScalarField, n: &NodalOutcome) -> Check {
    const NAME: &str = "instability past a nodal domain";
    if n.graph.domains.len() < 2 {
        return check(NAME, true, "not applicable: the derivative keeps one sign on the disk".into());
    }
    let grid = *n.v.grid();
    let seed = (0..grid.len()).find(|&id| {
        let (i, j) = grid.ij(id);
        !grid.is_boundary(i, j) && n.v.values()[id] > 0.0
    });
    let Some(seed) = seed else {
        return check(NAME, false, "no positive node".into());
    };
    let omega = sign_component(&n.v, seed);
    let enlarged = omega.dilate(ex.cfg.verify.enlarge_steps);
    match instability_past_nodal(u, &ex.potential, &n.v, &omega, &enlarged, NodalDomainTolerances::default(), ex.lanczos()) {
        Ok(r) => check(
            NAME,
            r.unstable && r.lowest_on_enlarged < 0.0,
            format!("lowest eigenvalue {:.6} on the domain, {:.6} after enlarging", r.lowest_on_domain, r.lowest_on_enlarged),
        ),
        Err(e) => check(NAME, false, e.to_string()),
    }
}

/// Loads a field, or relaxes the configured ansatz when `path` is `None`.
pub fn field_or_solve(ex: &Experiment, path: Option<&Path>, progress: Progress<'_>) -> Result<ScalarField, StageError> {
    match path {
        Some(p) => formats::load_field_bin(p).map_err(fail::<FormatError>(Stage::Solve)),
        None => {
            ex.create_output()?;
            let profile = ex.profile()?;
            let initial = ex.ansatz(&profile)?;
            timed(Stage::Solve, progress, || {
                let s = ex.solve(initial)?;
                let line = format!("converged in {} iterations", s.log.last().map_or(0, |r| r.iter));
                Ok((s.field, line))
            })
        }
    }
}
