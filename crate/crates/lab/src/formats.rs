//! Text and binary formats for profiles, fields, configurations and solver logs.

use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use acmorse_core::field::{FieldError, Grid, ScalarField};
use acmorse_core::geometry::{Configuration, GeometryError, OrientedLine};
use acmorse_core::potential::{DoubleWellPotential, HeteroclinicProfile, PotentialError};
use acmorse_core::solver::{IterationRecord, StepKind};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{path}:{line}: {message}")]
    Parse { path: PathBuf, line: usize, message: String },
    #[error("{path}: {source}")]
    Json { path: PathBuf, source: serde_json::Error },
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Profile(#[from] PotentialError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

impl FormatError {
    pub(crate) fn io(path: &Path) -> impl FnOnce(io::Error) -> FormatError + '_ {
        move |source| FormatError::Io { path: path.to_path_buf(), source }
    }

    fn parse(path: &Path, line: usize, message: impl Into<String>) -> FormatError {
        FormatError::Parse { path: path.to_path_buf(), line, message: message.into() }
    }
}

fn create(path: &Path) -> Result<BufWriter<File>, FormatError> {
    File::create(path).map(BufWriter::new).map_err(FormatError::io(path))
}

fn open(path: &Path) -> Result<BufReader<File>, FormatError> {
    File::open(path).map(BufReader::new).map_err(FormatError::io(path))
}

fn parse_f64(path: &Path, line: usize, s: &str) -> Result<f64, FormatError> {
    s.trim().parse::<f64>().map_err(|e| FormatError::parse(path, line, format!("bad number {s:?}: {e}")))
}

/// Data lines of a text file with `#` comments and blank lines removed, as
/// `(1-based line number, content)`.
fn data_lines(path: &Path, r: impl BufRead) -> Result<Vec<(usize, String)>, FormatError> {
    let mut out = Vec::new();
    for (k, line) in r.lines().enumerate() {
        let line = line.map_err(FormatError::io(path))?;
        let body = line.split('#').next().unwrap_or("").trim();
        if !body.is_empty() {
            out.push((k + 1, body.to_string()));
        }
    }
    Ok(out)
}

fn csv_row(path: &Path, line: usize, s: &str, width: usize) -> Result<Vec<f64>, FormatError> {
    let cols: Vec<&str> = s.split(',').collect();
    if cols.len() != width {
        return Err(FormatError::parse(path, line, format!("expected {width} columns, got {}", cols.len())));
    }
    cols.iter().map(|c| parse_f64(path, line, c)).collect()
}

fn expect_header(path: &Path, lines: &[(usize, String)], header: &str) -> Result<(), FormatError> {
    match lines.first() {
        Some((_, h)) if h == header => Ok(()),
        Some((n, h)) => Err(FormatError::parse(path, *n, format!("expected header {header:?}, got {h:?}"))),
        None => Err(FormatError::parse(path, 0, "empty file")),
    }
}

/// Profile samples as CSV `t,H,dH` with 16 significant digits.
pub fn write_profile_csv(w: &mut impl Write, profile: &HeteroclinicProfile) -> io::Result<()> {
    writeln!(w, "t,H,dH")?;
    for ((t, h), dh) in profile.ts().iter().zip(profile.hs()).zip(profile.dhs()) {
        writeln!(w, "{t:.15e},{h:.15e},{dh:.15e}")?;
    }
    Ok(())
}

pub fn save_profile_csv(path: &Path, profile: &HeteroclinicProfile) -> Result<(), FormatError> {
    let mut w = create(path)?;
    write_profile_csv(&mut w, profile).and_then(|_| w.flush()).map_err(FormatError::io(path))
}

pub fn load_profile_csv(path: &Path, potential: DoubleWellPotential) -> Result<HeteroclinicProfile, FormatError> {
    let lines = data_lines(path, open(path)?)?;
    expect_header(path, &lines, "t,H,dH")?;
    let (mut ts, mut hs, mut dhs) = (Vec::new(), Vec::new(), Vec::new());
    for (n, s) in &lines[1..] {
        let row = csv_row(path, *n, s, 3)?;
        ts.push(row[0]);
        hs.push(row[1]);
        dhs.push(row[2]);
    }
    Ok(HeteroclinicProfile::from_samples(potential, ts, hs, dhs)?)
}

/// Flat little-endian binary: `n` as u64, `h` and `origin` as f64, then
/// `n²` f64 values in row-major order (`x` fastest).
pub fn write_field_bin(w: &mut impl Write, field: &ScalarField) -> io::Result<()> {
    let g = field.grid();
    w.write_all(&(g.n() as u64).to_le_bytes())?;
    w.write_all(&g.h().to_le_bytes())?;
    w.write_all(&g.origin().to_le_bytes())?;
    for v in field.values() {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_field_bin(r: &mut impl Read) -> Result<ScalarField, ReadFieldError> {
    let mut word = [0u8; 8];
    r.read_exact(&mut word)?;
    let n = usize::try_from(u64::from_le_bytes(word)).map_err(|_| ReadFieldError::Header("grid size overflows"))?;
    r.read_exact(&mut word)?;
    let h = f64::from_le_bytes(word);
    r.read_exact(&mut word)?;
    let origin = f64::from_le_bytes(word);
    let count = n.checked_mul(n).ok_or(ReadFieldError::Header("grid size overflows"))?;
    let grid = Grid::new(n, h, origin)?;
    let mut bytes = vec![0u8; count.checked_mul(8).ok_or(ReadFieldError::Header("grid size overflows"))?];
    r.read_exact(&mut bytes)?;
    let values = bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
    if r.read(&mut word)? != 0 {
        return Err(ReadFieldError::Header("trailing bytes after the values"));
    }
    Ok(ScalarField::from_values(grid, values)?)
}

#[derive(Debug, Error)]
pub enum ReadFieldError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("malformed field header: {0}")]
    Header(&'static str),
}

pub fn save_field_bin(path: &Path, field: &ScalarField) -> Result<(), FormatError> {
    let mut w = create(path)?;
    write_field_bin(&mut w, field).and_then(|_| w.flush()).map_err(FormatError::io(path))
}

pub fn load_field_bin(path: &Path) -> Result<ScalarField, FormatError> {
    read_field_bin(&mut open(path)?).map_err(|e| match e {
        ReadFieldError::Io(source) => FormatError::Io { path: path.to_path_buf(), source },
        ReadFieldError::Field(f) => FormatError::Field(f),
        ReadFieldError::Header(m) => FormatError::parse(path, 0, m),
    })
}

/// Plot-friendly CSV `x,y,u`, one row per node, preceded by a comment line
/// carrying the exact grid.
pub fn write_field_csv(w: &mut impl Write, field: &ScalarField) -> io::Result<()> {
    let g = field.grid();
    writeln!(w, "# n={} h={:.16e} origin={:.16e}", g.n(), g.h(), g.origin())?;
    writeln!(w, "x,y,u")?;
    for j in 0..g.n() {
        for i in 0..g.n() {
            let p = g.point(i, j);
            writeln!(w, "{:.16e},{:.16e},{:.16e}", p.x, p.y, field.at(i, j))?;
        }
    }
    Ok(())
}

pub fn save_field_csv(path: &Path, field: &ScalarField) -> Result<(), FormatError> {
    let mut w = create(path)?;
    write_field_csv(&mut w, field).and_then(|_| w.flush()).map_err(FormatError::io(path))
}

pub fn load_field_csv(path: &Path) -> Result<ScalarField, FormatError> {
    let mut r = open(path)?;
    let mut first = String::new();
    r.read_line(&mut first).map_err(FormatError::io(path))?;
    let mut n = None;
    let mut h = None;
    let mut origin = None;
    for kv in first.trim_start_matches('#').split_whitespace() {
        match kv.split_once('=') {
            Some(("n", v)) => n = v.parse::<usize>().ok(),
            Some(("h", v)) => h = v.parse::<f64>().ok(),
            Some(("origin", v)) => origin = v.parse::<f64>().ok(),
            _ => {}
        }
    }
    let (Some(n), Some(h), Some(origin)) = (n, h, origin) else {
        return Err(FormatError::parse(path, 1, "missing `# n=.. h=.. origin=..` grid line"));
    };
    let grid = Grid::new(n, h, origin)?;
    let lines = data_lines(path, r)?;
    expect_header(path, &lines, "x,y,u")?;
    let mut values = Vec::with_capacity(grid.len());
    for (k, s) in &lines[1..] {
        values.push(csv_row(path, k + 1, s, 3)?[2]);
    }
    Ok(ScalarField::from_values(grid, values)?)
}

/// Configuration text: `k` on the first data line, then `2k` lines
/// `r theta_degrees`. `#` starts a comment.
pub fn parse_configuration(path: &Path, r: impl BufRead) -> Result<Configuration, FormatError> {
    let lines = data_lines(path, r)?;
    let Some((first, head)) = lines.first() else {
        return Err(FormatError::parse(path, 0, "empty configuration"));
    };
    let k: usize = head.parse().map_err(|_| FormatError::parse(path, *first, format!("expected k, got {head:?}")))?;
    if k == 0 {
        return Err(FormatError::parse(path, *first, "k must be at least 1"));
    }
    if lines.len() != 2 * k + 1 {
        return Err(FormatError::parse(path, *first, format!("k = {k} needs {} lines, found {}", 2 * k, lines.len() - 1)));
    }
    let mut out = Vec::with_capacity(2 * k);
    for (n, s) in &lines[1..] {
        let cols: Vec<&str> = s.split_whitespace().collect();
        if cols.len() != 2 {
            return Err(FormatError::parse(path, *n, "expected `r theta_degrees`"));
        }
        let r = parse_f64(path, *n, cols[0])?;
        let deg = parse_f64(path, *n, cols[1])?;
        out.push(OrientedLine::new(r, deg.to_radians()));
    }
    Ok(Configuration::new(out)?)
}

pub fn load_configuration(path: &Path) -> Result<Configuration, FormatError> {
    parse_configuration(path, open(path)?)
}

pub fn write_configuration(w: &mut impl Write, c: &Configuration) -> io::Result<()> {
    writeln!(w, "{}", c.k())?;
    for l in c.lines() {
        writeln!(w, "{} {}", l.r, l.theta.to_degrees())?;
    }
    Ok(())
}

fn kind_name(k: StepKind) -> &'static str {
    match k {
        StepKind::Initial => "initial",
        StepKind::Newton => "newton",
        StepKind::GradientFlow => "flow",
    }
}

/// Solver log as CSV `iter,residual_inf,energy,step,kind`.
pub fn write_iteration_log(w: &mut impl Write, log: &[IterationRecord]) -> io::Result<()> {
    writeln!(w, "iter,residual_inf,energy,step,kind")?;
    for r in log {
        writeln!(w, "{},{:.16e},{:.16e},{:.16e},{}", r.iter, r.residual_inf, r.energy, r.step, kind_name(r.kind))?;
    }
    Ok(())
}

pub fn save_iteration_log(path: &Path, log: &[IterationRecord]) -> Result<(), FormatError> {
    let mut w = create(path)?;
    write_iteration_log(&mut w, log).and_then(|_| w.flush()).map_err(FormatError::io(path))
}

pub fn load_iteration_log(path: &Path) -> Result<Vec<IterationRecord>, FormatError> {
    let lines = data_lines(path, open(path)?)?;
    expect_header(path, &lines, "iter,residual_inf,energy,step,kind")?;
    let mut out = Vec::new();
    for (n, s) in &lines[1..] {
        let (nums, kind) = s.rsplit_once(',').ok_or_else(|| FormatError::parse(path, *n, "missing kind"))?;
        let row = csv_row(path, *n, nums, 4)?;
        let kind = match kind {
            "initial" => StepKind::Initial,
            "newton" => StepKind::Newton,
            "flow" => StepKind::GradientFlow,
            other => return Err(FormatError::parse(path, *n, format!("unknown step kind {other:?}"))),
        };
        let iter = nums.split(',').next().unwrap().trim().parse().map_err(|_| FormatError::parse(path, *n, "bad iteration number"))?;
        out.push(IterationRecord { iter, residual_inf: row[1], energy: row[2], step: row[3], kind });
    }
    Ok(out)
}

/// Pretty JSON; floats use the shortest representation that parses back to
/// the same bits.
pub fn save_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<(), FormatError> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(|source| FormatError::Json { path: path.to_path_buf(), source })?;
    writeln!(w).and_then(|_| w.flush()).map_err(FormatError::io(path))
}

pub fn load_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, FormatError> {
    serde_json::from_reader(open(path)?).map_err(|source| FormatError::Json { path: path.to_path_buf(), source })
}
