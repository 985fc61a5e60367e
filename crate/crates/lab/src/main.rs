use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use acmorse_core::coloring::{bruteforce_oracle, unbalanced_control};
use acmorse_core::potential::DoubleWellPotential;
use acmorse_lab::formats;
use acmorse_lab::pipeline::{self, files, Experiment, Stage, StageError};
use acmorse_lab::records::{NodalRecord, OracleRecord, SpectraRecord};
use acmorse_lab::ExperimentConfig;
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "acmorse", version, about = "Morse index and nodal structure of multiple-end Allen-Cahn solutions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Experiment file (`key = value` with `[section]` headers).
    #[arg(long, short)]
    config: PathBuf,
    /// Overrides `experiment.seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides `experiment.output`.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Emit the heteroclinic profile as CSV `t,H,dH`.
    Heteroclinic {
        #[arg(long, default_value = "standard")]
        potential: String,
        #[arg(long, default_value_t = 20.0)]
        halfwidth: f64,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        /// Destination file; standard output when omitted.
        #[arg(long, short)]
        output: Option<PathBuf>,
        /// Accepted for uniformity; the profile is deterministic.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Sample the glued ansatz and write `ansatz.bin` / `ansatz.csv`.
    Ansatz(Common),
    /// Relax the ansatz and write `field.bin`, `field.csv`, `iterations.csv`.
    Solve(Common),
    /// Index profile over the configured radii, written to `spectra.json`.
    Spectrum {
        #[command(flatten)]
        common: Common,
        /// Use a stored solution instead of solving.
        #[arg(long)]
        field: Option<PathBuf>,
    },
    /// Nodal graph of the directional derivative, written to `nodal.json`.
    Nodal {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        field: Option<PathBuf>,
    },
    /// Randomized check of the coloring claims; JSON on standard output.
    ColoringOracle {
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 10_000)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Sample unbalanced configurations instead (a negative control).
        #[arg(long)]
        unbalanced: bool,
    },
    /// Full pipeline: writes every artifact and `summary.json`.
    Run(Common),
    /// Full pipeline plus the auxiliary checks; writes `verify.json`.
    Verify(Common),
}

enum Failure {
    Usage(String),
    Stage(StageError),
}

impl From<StageError> for Failure {
    fn from(e: StageError) -> Self {
        Failure::Stage(e)
    }
}

fn experiment(c: &Common) -> Result<Experiment, Failure> {
    let mut cfg = ExperimentConfig::load(&c.config).map_err(|e| Failure::Usage(e.to_string()))?;
    if let Some(seed) = c.seed {
        cfg.experiment.seed = seed;
    }
    if let Some(out) = &c.output {
        cfg.experiment.output = out.clone();
    }
    Experiment::new(cfg).map_err(|e| match e.stage {
        Stage::Configuration => Failure::Usage(e.to_string()),
        _ => Failure::Stage(e),
    })
}

fn progress(stage: Stage, line: &str) {
    eprintln!("[{stage}] {line}");
}

fn write_json_stdout<T: serde::Serialize>(value: &T) -> Result<(), Failure> {
    let mut out = std::io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, value)
        .map_err(std::io::Error::from)
        .and_then(|_| writeln!(out))
        .map_err(|e| Failure::Stage(StageError { stage: Stage::Output, message: e.to_string() }))
}

fn stage_err<E: std::fmt::Display>(stage: Stage) -> impl FnOnce(E) -> Failure {
    move |e| Failure::Stage(StageError { stage, message: e.to_string() })
}

fn run(cli: Cli) -> Result<(), Failure> {
    let mut report = progress;
    match cli.command {
        Command::Heteroclinic { potential, halfwidth, tol, output, seed: _ } => {
            let p = match potential.as_str() {
                "standard" => DoubleWellPotential::standard(),
                other => return Err(Failure::Usage(format!("unknown potential {other:?} (available: standard)"))),
            };
            if !(tol > 0.0) {
                return Err(Failure::Usage(format!("--tol must be positive, got {tol}")));
            }
            let profile = p.solve_heteroclinic(halfwidth, tol).map_err(stage_err(Stage::Profile))?;
            match output {
                Some(path) => formats::save_profile_csv(&path, &profile).map_err(stage_err(Stage::Output))?,
                None => {
                    let mut out = std::io::stdout().lock();
                    formats::write_profile_csv(&mut out, &profile).map_err(stage_err(Stage::Output))?;
                }
            }
        }
        Command::Ansatz(c) => {
            let ex = experiment(&c)?;
            ex.create_output()?;
            let u = ex.ansatz(&ex.profile()?)?;
            formats::save_field_bin(&ex.artifact(files::ANSATZ_BIN), &u).map_err(stage_err(Stage::Ansatz))?;
            formats::save_field_csv(&ex.artifact(files::ANSATZ_CSV), &u).map_err(stage_err(Stage::Ansatz))?;
            progress(Stage::Ansatz, &format!("wrote {}", ex.artifact(files::ANSATZ_BIN).display()));
        }
        Command::Solve(c) => {
            let ex = experiment(&c)?;
            pipeline::field_or_solve(&ex, None, &mut report)?;
        }
        Command::Spectrum { common, field } => {
            let ex = experiment(&common)?;
            let u = pipeline::field_or_solve(&ex, field.as_deref(), &mut report)?;
            ex.create_output()?;
            let profile = ex.spectrum(&u)?;
            write_json_stdout(&SpectraRecord::from(&profile))?;
        }
        Command::Nodal { common, field } => {
            let ex = experiment(&common)?;
            let u = pipeline::field_or_solve(&ex, field.as_deref(), &mut report)?;
            ex.create_output()?;
            let n = ex.nodal(&u)?;
            let e = ex.direction();
            write_json_stdout(&NodalRecord::new(&n.graph, [e.x, e.y], n.ends, &n.euler, &n.chain))?;
        }
        Command::ColoringOracle { k, trials, seed, unbalanced } => {
            let stats = if unbalanced { unbalanced_control(k, trials, seed) } else { bruteforce_oracle(k, trials, seed) };
            let stats = stats.map_err(|e| Failure::Usage(e.to_string()))?;
            write_json_stdout(&OracleRecord::new(&stats, seed))?;
        }
        Command::Run(c) => {
            let ex = experiment(&c)?;
            let out = pipeline::run_pipeline(&ex, &mut report)?;
            write_json_stdout(&out.summary)?;
        }
        Command::Verify(c) => {
            let ex = experiment(&c)?;
            let record = pipeline::verify(&ex, &mut report)?;
            for check in &record.checks {
                eprintln!("{} {}: {}", if check.pass { "PASS" } else { "FAIL" }, check.name, check.detail);
            }
            write_json_stdout(&record.summary)?;
            if !record.pass {
                return Err(Failure::Stage(StageError { stage: Stage::Verify, message: "at least one check failed".into() }));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Stage(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
